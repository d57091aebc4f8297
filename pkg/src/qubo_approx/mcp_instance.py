from __future__ import annotations

from mcp.server.fastmcp import FastMCP

from qubo_approx.config import get_settings

settings = get_settings()

# Shared server instance; tools attach to it in register_all_tools().
mcp = FastMCP(settings.mcp_name)
