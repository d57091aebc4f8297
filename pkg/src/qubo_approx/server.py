from qubo_approx.mcp_instance import mcp
from qubo_approx.tools import register_all_tools

register_all_tools()

__all__ = ["mcp"]
