from typing import Any, Dict, Mapping, Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from ..config import get_settings
from ..models.configs import LossWeights

console = Console()


def workers_from(ctx: typer.Context) -> int:
    obj = ctx.obj or {}
    return obj.get("workers") or get_settings().workers


def build(model, **fields: Any):
    """Instantiates a config model from flags; invalid values become usage errors."""
    try:
        return model(**{key: value for key, value in fields.items() if value is not None})
    except ValidationError as e:
        error = e.errors()[0]
        location = ".".join(str(part) for part in error["loc"])
        raise typer.BadParameter(f"{location}: {error['msg']}") from None


def loss_weights(
    preset: Optional[str], lambda1: Optional[float], lambda2: Optional[float], lambda3: Optional[float]
) -> LossWeights:
    """A preset (default 'full') with individual weights overriding it."""
    try:
        base = LossWeights.preset(preset or "full")
    except ValueError as e:
        raise typer.BadParameter(str(e), param_hint="--preset") from None
    return build(
        LossWeights,
        lambda1=base.lambda1 if lambda1 is None else lambda1,
        lambda2=base.lambda2 if lambda2 is None else lambda2,
        lambda3=base.lambda3 if lambda3 is None else lambda3,
    )


def print_metrics(title: str, values: Mapping[str, Any]) -> None:
    table = Table(title=title)
    table.add_column("metric")
    table.add_column("value", justify="right")
    for key, value in values.items():
        table.add_row(key, f"{value:.6g}" if isinstance(value, float) else str(value))
    console.print(table)


def print_rows(title: str, rows: Dict[str, Mapping[str, Any]]) -> None:
    """One table row per view."""
    if not rows:
        return
    columns = list(next(iter(rows.values())).keys())
    table = Table(title=title)
    table.add_column("view")
    for column in columns:
        table.add_column(column, justify="right")
    for name, values in rows.items():
        table.add_row(name, *(f"{values[c]:.6g}" if isinstance(values[c], float) else str(values[c]) for c in columns))
    console.print(table)
