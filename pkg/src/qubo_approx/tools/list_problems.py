from __future__ import annotations

from dataclasses import asdict

from qubo_approx.problems import list_problem_specs
from qubo_approx.tools._base import BaseTool, ToolSpec, tool_decorator


class ListProblemsTool(BaseTool):
    @property
    def spec(self) -> ToolSpec:
        return ToolSpec(
            name="list_problems",
            description="List the problem encoders with their quality metric and reference value.",
        )

    def register(self) -> None:
        @tool_decorator(name=self.spec.name, description=self.spec.description)
        def list_problems() -> list[dict]:
            return [{**asdict(s), "kind": s.kind.value} for s in list_problem_specs()]
