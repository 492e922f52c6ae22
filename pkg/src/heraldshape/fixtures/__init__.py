"""Shipped scenario files."""

from importlib.resources import files


def fixture_path(name: str):
    return files(__name__) / name


def fixture_names() -> list[str]:
    return sorted(p.name for p in files(__name__).iterdir() if p.name.endswith(".json"))
