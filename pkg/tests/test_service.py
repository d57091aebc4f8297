"""In-process checks of the HTTP routes and tool callables (no server needed)."""

from __future__ import annotations

import httpx
import pytest

from qubo_approx.app import create_app
from qubo_approx.config import get_settings
from qubo_approx.qubo import loads
from qubo_approx.tools import get_tool, list_tool_specs

EXPECTED_TOOLS = {"list_problems", "build_qubo", "prune_qubo", "solve_qubo", "brute_force_qubo", "embed_qubo"}

EDGE = "2 0\n0 0 -1 soft\n0 1 2 soft\n1 1 -1 soft\n"
PATH = "3 0\n0 1 1 soft\n1 2 1 soft\n"


@pytest.fixture
async def client():
    transport = httpx.ASGITransport(app=create_app())
    async with httpx.AsyncClient(transport=transport, base_url="http://test") as c:
        yield c


async def test_health(client):
    r = await client.get("/health")
    assert r.status_code == 200
    body = r.json()
    assert body["ok"] is True
    assert body["chimera"] == get_settings().chimera_raw


async def test_tool_listing(client):
    r = await client.get("/tools")
    assert {t["name"] for t in r.json()} == EXPECTED_TOOLS

    r = await client.get("/tools/solve_qubo")
    assert r.json()["name"] == "solve_qubo"

    r = await client.get("/tools/nope")
    assert r.status_code == 404
    assert r.json()["detail"] == "Tool not found: nope"


async def test_problem_listing(client):
    r = await client.get("/problems")
    kinds = {p["kind"] for p in r.json()}
    assert len(kinds) == 8
    assert "graph-isomorphism" in kinds

    r = await client.get("/problems/max-cut")
    assert r.json()["higher_is_better"] is True


async def test_unknown_problem_is_a_bad_request(client):
    r = await client.get("/problems/bogus")
    assert r.status_code == 400
    assert r.json()["error"] == "ParameterError"


async def test_build_then_brute_force_over_http(client):
    r = await client.post("/tools/build_qubo", json={"problem": "max-cut", "size": 4, "seed": 0})
    assert r.status_code == 200
    built = r.json()
    assert built["n"] == 4
    assert built["problem"] == "max-cut"
    assert loads(built["qubo"]).n == 4

    r = await client.post("/tools/brute_force_qubo", json={"qubo": built["qubo"]})
    best = r.json()
    assert len(best["assignment"]) == 4
    assert best["energy"] <= 0


async def test_tool_errors_map_to_status_codes(client):
    r = await client.post("/tools/prune_qubo", json={"qubo": EDGE, "strategy": "largest", "p": 0.5})
    assert r.status_code == 400
    r = await client.post("/tools/brute_force_qubo", json={"matrix": EDGE})
    assert r.status_code == 422
    r = await client.post("/tools/nope", json={})
    assert r.status_code == 404


def test_registry_is_stable():
    assert [s.name for s in list_tool_specs()] == [s.name for s in list_tool_specs()]
    assert get_tool("missing") is None


async def test_prune_tool_removes_soft_couplings():
    result = await get_tool("prune_qubo").run(qubo=EDGE, strategy="fraction", p=1.0)
    assert result["deleted"] == 1
    assert result["strategy"] == "fraction"
    assert result["stats"]["soft_offdiagonal"] == 0
    assert loads(result["qubo"]).n == 2


def test_solve_tool_finds_the_edge_minimum():
    result = get_tool("solve_qubo").run_sync(qubo=EDGE, runs=5, sweeps=50, seed=2)
    assert result["best_energy"] == -1.0
    assert result["best_assignment"] in {"01", "10"}
    assert result["mean_energy"] >= result["best_energy"]


def test_brute_force_tool():
    assert get_tool("brute_force_qubo").run_sync(qubo=EDGE) == {"energy": -1.0, "assignment": "01"}


def test_embed_tool_on_a_path():
    result = get_tool("embed_qubo").run_sync(qubo=PATH, chimera_shape="2x2x4", seed=0)
    assert result["embedded"] is True
    assert result["chimera"] == "2x2x4"
    assert set(result["chains"]) == {"0", "1", "2"}
    assert result["physical_qubits"] >= 3
