from __future__ import annotations

from dataclasses import asdict

from fastapi import APIRouter

from qubo_approx.problems import get_problem, list_problem_specs

router = APIRouter(prefix="/problems", tags=["problems"])


def _spec_dict(spec) -> dict:
    return {**asdict(spec), "kind": spec.kind.value}


@router.get("")
def list_problems() -> list[dict]:
    return [_spec_dict(s) for s in list_problem_specs()]


@router.get("/{kind}")
def problem_details(kind: str) -> dict:
    """Unknown kinds raise ParameterError, which the app turns into a 400."""
    return _spec_dict(get_problem(kind).spec)
