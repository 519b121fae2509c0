"""Line-oriented scene descriptions.

    # comment
    size <width> <height>
    focal <f>
    depth_range <min> <max>
    background <depth>
    rect <x_min> <x_max> <y_min> <y_max> <depth>     (repeatable)
    texture value_checker seed <int> cell <px>
    rig lateral|ring <count> <baseline>

Omitted lines keep their defaults.
"""
from pathlib import Path
from typing import Any, Dict, List, Union

from pydantic import ValidationError

from ..exceptions import InvalidSpec
from ..models.scene import RectangleSpec, RigSpec, SceneSpec, TextureSpec

PathLike = Union[str, Path]

ARITY = {"size": 2, "focal": 1, "depth_range": 2, "background": 1, "rect": 5, "texture": 5, "rig": 3}


def _float(token: str, line_no: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise InvalidSpec(f"line {line_no}: expected a number, found {token!r}") from None


def _int(token: str, line_no: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise InvalidSpec(f"line {line_no}: expected an integer, found {token!r}") from None


def parse_scene_spec(text: str) -> SceneSpec:
    fields: Dict[str, Any] = {}
    rectangles: List[Dict[str, float]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        keyword, args = tokens[0].lower(), tokens[1:]
        if keyword not in ARITY:
            raise InvalidSpec(f"line {line_no}: unknown keyword {keyword!r}")
        if len(args) != ARITY[keyword]:
            raise InvalidSpec(f"line {line_no}: '{keyword}' takes {ARITY[keyword]} values, got {len(args)}")

        if keyword == "size":
            fields["width"], fields["height"] = _int(args[0], line_no), _int(args[1], line_no)
        elif keyword == "focal":
            fields["focal"] = _float(args[0], line_no)
        elif keyword == "depth_range":
            fields["depth_min"], fields["depth_max"] = (_float(a, line_no) for a in args)
        elif keyword == "background":
            fields["background_depth"] = _float(args[0], line_no)
        elif keyword == "rect":
            x_min, x_max, y_min, y_max, depth = (_float(a, line_no) for a in args)
            rectangles.append(dict(x_min=x_min, x_max=x_max, y_min=y_min, y_max=y_max, depth=depth))
        elif keyword == "texture":
            if args[1] != "seed" or args[3] != "cell":
                raise InvalidSpec(f"line {line_no}: expected 'texture <pattern> seed <int> cell <px>'")
            fields["texture"] = dict(pattern=args[0], seed=_int(args[2], line_no), cell_px=_float(args[4], line_no))
        elif keyword == "rig":
            fields["rig"] = dict(kind=args[0], count=_int(args[1], line_no), baseline=_float(args[2], line_no))

    try:
        return SceneSpec(
            **{k: v for k, v in fields.items() if k not in ("texture", "rig")},
            rectangles=[RectangleSpec(**r) for r in rectangles],
            texture=TextureSpec(**fields.get("texture", {})),
            rig=RigSpec(**fields.get("rig", {})),
        )
    except ValidationError as e:
        error = e.errors()[0]
        location = ".".join(str(part) for part in error["loc"]) or "scene"
        raise InvalidSpec(f"invalid scene ({location}): {error['msg']}") from e


def format_scene_spec(spec: SceneSpec) -> str:
    lines = [
        f"size {spec.width} {spec.height}",
        f"focal {spec.focal!r}",
        f"depth_range {spec.depth_min!r} {spec.depth_max!r}",
        f"background {spec.background_depth!r}",
    ]
    lines += [f"rect {r.x_min!r} {r.x_max!r} {r.y_min!r} {r.y_max!r} {r.depth!r}" for r in spec.rectangles]
    t, rig = spec.texture, spec.rig
    lines.append(f"texture {t.pattern} seed {t.seed} cell {t.cell_px!r}")
    lines.append(f"rig {rig.kind} {rig.count} {rig.baseline!r}")
    return "\n".join(lines) + "\n"


def read_scene_spec(path: PathLike) -> SceneSpec:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InvalidSpec(f"cannot read scene file {path}: {e}") from e
    return parse_scene_spec(text)


def write_scene_spec(path: PathLike, spec: SceneSpec) -> None:
    Path(path).write_text(format_scene_spec(spec))
