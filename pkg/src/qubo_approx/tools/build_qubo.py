from __future__ import annotations

from qubo_approx.problems import generate_instance, get_problem
from qubo_approx.tools._base import BaseTool, ToolSpec, qubo_payload, tool_decorator


class BuildQuboTool(BaseTool):
    @property
    def spec(self) -> ToolSpec:
        return ToolSpec(
            name="build_qubo",
            description="Generate a seeded instance of a problem kind and return its tagged QUBO as text.",
        )

    def register(self) -> None:
        @tool_decorator(name=self.spec.name, description=self.spec.description)
        def build_qubo(problem: str, size: int, seed: int = 0) -> dict:
            """Build the QUBO of a generated `problem` instance of the given size."""
            kind = get_problem(problem).spec.kind
            inst, q = generate_instance(kind, size, seed)
            return {
                "problem": kind.value,
                "size": size,
                "seed": seed,
                "n_variables": inst.n_variables,
                "penalty_weights": list(inst.penalty_weights) if inst.penalty_weights else None,
                **qubo_payload(q),
            }
