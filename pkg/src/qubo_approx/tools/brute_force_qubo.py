from __future__ import annotations

from qubo_approx.qubo import loads
from qubo_approx.sampler import brute_force
from qubo_approx.tools._base import BaseTool, ToolSpec, tool_decorator


class BruteForceQuboTool(BaseTool):
    @property
    def spec(self) -> ToolSpec:
        return ToolSpec(
            name="brute_force_qubo",
            description="Exact minimum of a small QUBO by enumerating every assignment.",
        )

    def register(self) -> None:
        @tool_decorator(name=self.spec.name, description=self.spec.description)
        def brute_force_qubo(qubo: str) -> dict:
            best = brute_force(loads(qubo))
            return {"energy": best.energy, "assignment": "".join(str(b) for b in best.assignment)}
