"""Sampled coefficient grids with multilinear interpolation.

Grids clamp queries to their breakpoint range (no extrapolation) and are
exact at the nodes.  They load from / save to a small plain-text format::

    # comment
    table cl_alpha
    axis alpha_deg: -16 -14 -12 ... 20
    values: 0.2 0.25 ...
            0.9 1.0          # values may span multiple lines

    table thrust_max
    axis airspeed_mps: 0 10 20 25 30 40 50 60
    axis altitude_m: 0 1000 2000 4000
    values: ...              # row-major, first axis slowest

A ``table`` line starts a block; ``axis`` lines declare breakpoints in
order; everything after ``values:`` up to the next ``table`` (or EOF) is
the flattened value array.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError


@dataclass
class GridTable:
    """N-dimensional sampled table over strictly increasing breakpoints."""

    name: str
    axes: list = field(default_factory=list)   # [(axis_name, np.ndarray)]
    values: np.ndarray = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        shape = []
        for ax_name, pts in self.axes:
            pts = np.asarray(pts, dtype=float)
            if pts.ndim != 1 or len(pts) < 2:
                raise ConfigurationError(
                    f"table {self.name}: axis {ax_name} needs >= 2 breakpoints")
            if not np.all(np.diff(pts) > 0):
                raise ConfigurationError(
                    f"table {self.name}: axis {ax_name} breakpoints must be "
                    f"strictly increasing")
            shape.append(len(pts))
        self.axes = [(n, np.asarray(p, dtype=float)) for n, p in self.axes]
        if self.values.size != int(np.prod(shape)):
            raise ConfigurationError(
                f"table {self.name}: {self.values.size} values for grid shape "
                f"{tuple(shape)}")
        self.values = self.values.reshape(shape)
        if not np.all(np.isfinite(self.values)):
            raise ConfigurationError(f"table {self.name}: non-finite values")

    @property
    def ndim(self):
        return len(self.axes)

    def __call__(self, *coords):
        """Multilinear interpolation, clamped to the breakpoint range."""
        if len(coords) != self.ndim:
            raise ConfigurationError(
                f"table {self.name}: expected {self.ndim} coordinates, "
                f"got {len(coords)}")
        vals = self.values
        # Interpolate along the last axis first so earlier axes stay leading.
        for dim in range(self.ndim - 1, -1, -1):
            pts = self.axes[dim][1]
            x = min(max(float(coords[dim]), pts[0]), pts[-1])
            i = int(np.searchsorted(pts, x, side="right")) - 1
            i = min(max(i, 0), len(pts) - 2)
            t = (x - pts[i]) / (pts[i + 1] - pts[i])
            vals = vals.take(i, axis=dim) * (1.0 - t) + vals.take(i + 1, axis=dim) * t
        return float(vals)


def parse_tables(text: str) -> dict:
    """Parse the plain-text grid format into {name: GridTable}."""
    tables = {}
    name = None
    axes = []
    value_tokens = []
    in_values = False

    def flush():
        nonlocal name, axes, value_tokens, in_values
        if name is None:
            return
        if not axes or not value_tokens:
            raise ConfigurationError(f"table {name}: missing axes or values")
        tables[name] = GridTable(name=name, axes=axes,
                                 values=np.array([float(v) for v in value_tokens]))
        name, axes, value_tokens, in_values = None, [], [], False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("table "):
            flush()
            name = line.split(None, 1)[1].strip()
            in_values = False
        elif line.startswith("axis "):
            if name is None or in_values:
                raise ConfigurationError(f"line {lineno}: axis outside a table header")
            head, _, rest = line[5:].partition(":")
            pts = [float(v) for v in rest.split()]
            axes.append((head.strip(), np.array(pts)))
        elif line.startswith("values"):
            if name is None:
                raise ConfigurationError(f"line {lineno}: values outside a table")
            in_values = True
            _, _, rest = line.partition(":")
            value_tokens.extend(rest.split())
        elif in_values:
            value_tokens.extend(line.split())
        else:
            raise ConfigurationError(f"line {lineno}: unexpected content {line!r}")
    flush()
    return tables


def format_tables(tables: dict) -> str:
    """Serialize {name: GridTable} back to the text format."""
    out = []
    for name, tab in tables.items():
        out.append(f"table {name}")
        for ax_name, pts in tab.axes:
            out.append("axis %s: %s" % (ax_name, " ".join("%.10g" % p for p in pts)))
        flat = tab.values.ravel()
        lines = []
        for i in range(0, len(flat), 8):
            lines.append(" ".join("%.10g" % v for v in flat[i:i + 8]))
        out.append("values: " + lines[0])
        out.extend("        " + l for l in lines[1:])
        out.append("")
    return "\n".join(out)


def load_tables(path) -> dict:
    with open(path, "r") as fh:
        return parse_tables(fh.read())


def save_tables(tables: dict, path):
    with open(path, "w") as fh:
        fh.write(format_tables(tables))
