from __future__ import annotations

from typing import Optional

from qubo_approx.qubo import loads
from qubo_approx.sampler import SaParams, sample_many
from qubo_approx.tools._base import BaseTool, ToolSpec, tool_decorator


class SolveQuboTool(BaseTool):
    @property
    def spec(self) -> ToolSpec:
        return ToolSpec(
            name="solve_qubo",
            description="Minimise a QUBO with repeated simulated annealing; returns best and mean energy.",
        )

    def register(self) -> None:
        @tool_decorator(name=self.spec.name, description=self.spec.description)
        def solve_qubo(qubo: str, runs: int = 10, sweeps: Optional[int] = None, seed: int = 0) -> dict:
            params = SaParams(seed=seed) if sweeps is None else SaParams(sweeps=sweeps, seed=seed)
            samples = sample_many(loads(qubo), runs, params)
            best = samples.best
            return {
                "runs": runs,
                "sweeps": params.sweeps,
                "best_energy": best.energy,
                "mean_energy": samples.mean_energy,
                "best_assignment": "".join(str(b) for b in best.assignment),
            }
