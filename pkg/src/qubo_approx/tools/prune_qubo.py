from __future__ import annotations

from typing import Optional

from qubo_approx.pruning import PruneStrategy
from qubo_approx.qubo import loads
from qubo_approx.tools._base import BaseTool, ToolSpec, qubo_payload, tool_decorator


class PruneQuboTool(BaseTool):
    @property
    def spec(self) -> ToolSpec:
        return ToolSpec(
            name="prune_qubo",
            description="Delete a fraction p of the soft off-diagonal entries (fraction, threshold or random).",
        )

    def register(self) -> None:
        @tool_decorator(name=self.spec.name, description=self.spec.description)
        def prune_qubo(qubo: str, strategy: str, p: float, seed: Optional[int] = None) -> dict:
            s = PruneStrategy.parse(strategy, seed)
            pruned, deleted = s.apply_with_count(loads(qubo), p)
            return {"strategy": s.label, "p": p, "deleted": deleted, **qubo_payload(pruned)}
