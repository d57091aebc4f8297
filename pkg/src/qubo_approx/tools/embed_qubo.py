from __future__ import annotations

from typing import Optional

from qubo_approx.config import get_settings, parse_chimera
from qubo_approx.embedding import chimera, embed_qubo as find_qubo_embedding
from qubo_approx.qubo import loads
from qubo_approx.tools._base import BaseTool, ToolSpec, tool_decorator


class EmbedQuboTool(BaseTool):
    @property
    def spec(self) -> ToolSpec:
        return ToolSpec(
            name="embed_qubo",
            description="Minor-embed a QUBO's connectivity graph into a chimera graph and report chain sizes.",
        )

    def register(self) -> None:
        @tool_decorator(name=self.spec.name, description=self.spec.description)
        def embed_qubo(
            qubo: str, chimera_shape: Optional[str] = None, seed: int = 0, attempts: Optional[int] = None
        ) -> dict:
            gc = chimera(*parse_chimera(chimera_shape or get_settings().chimera_raw))
            emb, metrics = find_qubo_embedding(loads(qubo), gc, seed, attempts)
            if emb is None:
                return {"embedded": False, "chimera": gc.label}
            return {
                "embedded": True,
                "chimera": gc.label,
                **metrics._asdict(),
                "chains": {str(v): sorted(c) for v, c in sorted(emb.chains.items())},
            }
