"""Deterministic text output: 17 significant digits, CSV rows and key=value lines."""

from typing import Iterable, List, Optional, Sequence, Tuple, Union

Cell = Union[float, int, complex, str, None]


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def format_complex(z: complex) -> str:
    """a+bi with both parts at 17 significant digits, e.g. 1+0i."""
    z = complex(z)
    sign = "-" if z.imag < 0 else "+"
    return f"{format_float(z.real)}{sign}{format_float(abs(z.imag))}i"


def format_cell(value: Cell) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, complex):
        return format_complex(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def csv_lines(header: Sequence[str], rows: Iterable[Sequence[Cell]]) -> List[str]:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_cell(v) for v in row))
    return lines


def pairs_line(pairs: Sequence[Tuple[str, Cell]]) -> str:
    return " ".join(f"{key}={format_cell(value)}" for key, value in pairs)


def parse_complex(text: str) -> complex:
    """Complex literal with i or j as imaginary unit: 'i', '2i', '1+1i', '-0.5-2j'."""
    s = text.strip().replace(" ", "").replace("i", "j")
    if not s:
        raise ValueError("empty complex literal")
    if s.endswith("j") and (len(s) == 1 or s[-2] in "+-"):
        s = s[:-1] + "1j"
    return complex(s)


def parse_list(text: Optional[str], item=float) -> list:
    if text is None or not text.strip():
        return []
    return [item(part) for part in text.split(",") if part.strip()]

