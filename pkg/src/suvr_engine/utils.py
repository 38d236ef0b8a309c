from collections.abc import Iterable

TRUTHY_VALUES = ("1", "true", "yes", "on")


def parse_bool(val, default=True):
    """
    Convert a value to boolean.

    Args:
        val: The value to convert.
        default (bool, optional): The default value to return if val is None. Defaults to True.

    Returns:
        bool: True if val represents a truthy value ("1", "true", "yes", "on"), case-insensitive; otherwise False.
    """
    if val is None:
        return default
    return str(val).strip().casefold() in TRUTHY_VALUES


def parse_csv_list(val: str | None) -> list[str]:
    """
    Split a comma-separated flag value into stripped, non-empty items.

    Args:
        val: Raw value such as "bfs, dfs,greedy". None yields an empty list.

    Returns:
        list[str]: The items in their original order.
    """
    if val is None:
        return []
    return [item.strip() for item in val.split(",") if item.strip()]


def parse_int_list(val: str | None) -> list[int]:
    """
    Split a comma-separated flag value into integers ("1,2,4,8" -> [1, 2, 4, 8]).

    Raises:
        ValueError: If any item is not an integer.
    """
    return [int(item) for item in parse_csv_list(val)]


def format_table(headers: list[str], rows: Iterable[list[str]]) -> str:
    """Render rows as a left-aligned, fixed-width text table."""
    materialized = [list(map(str, row)) for row in rows]
    widths = [len(h) for h in headers]
    for row in materialized:
        for col, cell in enumerate(row):
            widths[col] = max(widths[col], len(cell))
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths, strict=True))]
    lines.append("  ".join("-" * w for w in widths))
    for row in materialized:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths, strict=True)))
    return "\n".join(lines) + "\n"
