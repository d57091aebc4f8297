"""
Integration tests for a locally running service (NO MOCKS).

Assumptions:
- The server is started separately with: qubo-approx serve
- HOST/PORT/MCP_MOUNT_PATH come from the environment, .env or .env.example.

Every MCP step is wrapped in asyncio.wait_for and the SSE context is always
closed, so these tests never hang.
"""

from __future__ import annotations

import asyncio
import json
import os
from pathlib import Path
from typing import Any

import httpx
import pytest
from dotenv import dotenv_values

from mcp import ClientSession
from mcp.client.sse import sse_client


def _load_value(key: str, default: str = "") -> str:
    if os.getenv(key):
        return os.getenv(key) or default
    for candidate in (Path(".env"), Path(".env.example")):
        if candidate.exists():
            v = dotenv_values(candidate).get(key)
            if v:
                return str(v)
    return default


HOST = _load_value("HOST", "127.0.0.1")
PORT = _load_value("PORT", "8080")
MCP_MOUNT_PATH = _load_value("MCP_MOUNT_PATH", "/mcp").rstrip("/")
BASE_URL = f"http://{HOST}:{PORT}"
MCP_SSE_URL = f"{BASE_URL}{MCP_MOUNT_PATH}/sse"

HTTP_TIMEOUT_S = float(_load_value("TEST_HTTP_TIMEOUT_S", "10"))
MCP_STEP_TIMEOUT_S = float(_load_value("TEST_MCP_STEP_TIMEOUT_S", "30"))

EXPECTED_TOOLS = {"list_problems", "build_qubo", "prune_qubo", "solve_qubo", "brute_force_qubo", "embed_qubo"}


async def _http_get_json(path: str) -> Any:
    async with httpx.AsyncClient(timeout=HTTP_TIMEOUT_S) as client:
        r = await client.get(f"{BASE_URL}{path}")
        r.raise_for_status()
        return r.json()


def _extract_text(result: Any) -> str:
    """Join the text blocks of a CallToolResult."""
    content = getattr(result, "content", None) or []
    return "".join(t for t in (getattr(blk, "text", None) for blk in content) if isinstance(t, str)).strip()


async def _wait(coro, *, timeout_s: float, label: str):
    try:
        return await asyncio.wait_for(coro, timeout=timeout_s)
    except asyncio.TimeoutError as e:
        raise AssertionError(f"Timed out after {timeout_s:.0f}s while waiting for: {label}") from e


async def _open_mcp_session() -> tuple[ClientSession, Any]:
    sse_ctx = sse_client(MCP_SSE_URL)
    read, write = await _wait(sse_ctx.__aenter__(), timeout_s=MCP_STEP_TIMEOUT_S, label=f"open SSE stream {MCP_SSE_URL}")
    session = ClientSession(read, write)
    await _wait(session.initialize(), timeout_s=MCP_STEP_TIMEOUT_S, label="MCP session.initialize()")
    return session, sse_ctx


async def _close_mcp_session(sse_ctx: Any) -> None:
    await _wait(sse_ctx.__aexit__(None, None, None), timeout_s=MCP_STEP_TIMEOUT_S, label="close SSE context")


@pytest.mark.integration
@pytest.mark.asyncio
async def test_health_ok():
    health = await _http_get_json("/health")
    assert health.get("ok") is True
    assert "mcp_mount_path" in health


@pytest.mark.integration
@pytest.mark.asyncio
async def test_tools_http_list_ok():
    tools = await _http_get_json("/tools")
    assert EXPECTED_TOOLS <= {t.get("name") for t in tools}


@pytest.mark.integration
@pytest.mark.asyncio
async def test_mcp_list_tools_over_sse():
    session, sse_ctx = await _open_mcp_session()
    try:
        tools = await _wait(session.list_tools(), timeout_s=MCP_STEP_TIMEOUT_S, label="MCP session.list_tools()")
        assert EXPECTED_TOOLS <= {t.name for t in tools.tools}
    finally:
        await _close_mcp_session(sse_ctx)


@pytest.mark.integration
@pytest.mark.asyncio
async def test_mcp_build_then_brute_force():
    session, sse_ctx = await _open_mcp_session()
    try:
        built = await _wait(
            session.call_tool("build_qubo", arguments={"problem": "number-partitioning", "size": 6, "seed": 1}),
            timeout_s=MCP_STEP_TIMEOUT_S,
            label='MCP call_tool("build_qubo")',
        )
        payload = json.loads(_extract_text(built))
        assert payload["n"] == 6

        best = await _wait(
            session.call_tool("brute_force_qubo", arguments={"qubo": payload["qubo"]}),
            timeout_s=MCP_STEP_TIMEOUT_S,
            label='MCP call_tool("brute_force_qubo")',
        )
        result = json.loads(_extract_text(best))
        assert len(result["assignment"]) == 6
        assert result["energy"] >= 0
    finally:
        await _close_mcp_session(sse_ctx)
