"""Dynamic membership for forest languages under relabeling updates."""
from importlib import resources

__version__ = "0.1.0"

CORPUS = ("parity", "antichain", "marked_ancestor", "next_sibling", "leafword", "everything")


def corpus_text(name: str) -> str:
    """Contents of a shipped corpus file; a bare name means ``<name>.aut``."""
    fname = name if "." in name else f"{name}.aut"
    return resources.files(__package__).joinpath("corpus", fname).read_text()


def corpus_automaton(name: str):
    from .automaton import parse_automaton
    return parse_automaton(corpus_text(name), name=name)
