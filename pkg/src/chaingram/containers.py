"""Container pipelines: recognized sub-spans collapse into their category.

Each container owns a chain store and a set of trigger categories.  A
container repeatedly finds the leftmost-longest sub-span of its input
stream that recognizes as one of its triggers, replaces the span by the
recognized token, and rescans; the resulting stream feeds the next
container.  The pipeline accepts when the final stream is a single
trigger token of the last container.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .chains import Chain, ChainStore, Token, load_store, tokenize_sentence
from .complexes import SearchConfig, dangling_token
from .engine import enumerate_complexes


@dataclass(frozen=True)
class Container:
    name: str
    store: ChainStore
    triggers: frozenset[Token]
    search: SearchConfig = SearchConfig()

    def __post_init__(self):
        if not self.triggers:
            raise ValueError("container needs at least one trigger category")
        if any(not tok.is_category for tok in self.triggers):
            raise ValueError("triggers must be category tokens")


@dataclass(frozen=True)
class Pipeline:
    containers: tuple[Container, ...]

    def __post_init__(self):
        names = [c.name for c in self.containers]
        if len(set(names)) != len(names):
            raise ValueError("container names must be unique")


@dataclass
class PipelineResult:
    final_stream: tuple[Token, ...]
    trace: list[tuple[str, tuple[int, int], Token]]
    accepted: bool


def recognize_spans(container: Container,
                    stream: tuple[Token, ...]) -> list[tuple[tuple[int, int], Token]]:
    """Sub-spans (1-based, inclusive) recognizing as a trigger category.

    Ordered leftmost-first, then longest-first; each span reports the
    first trigger conclusion its witness stream produces.
    """
    if not stream:
        raise ValueError("stream is empty")
    out: list[tuple[tuple[int, int], Token]] = []
    n = len(stream)
    for i in range(1, n + 1):
        for j in range(n, i - 1, -1):
            fragment = Chain(stream[i - 1:j])
            for x, _ in enumerate_complexes(fragment, container.store, container.search):
                tok = dangling_token(x)
                if tok in container.triggers:
                    out.append(((i, j), tok))
                    break
    return out


def run_pipeline(pipeline: Pipeline, sentence: str) -> PipelineResult:
    """Feed a sentence through the containers in order.

    Within a container, replacement repeats to fixpoint, capped at the
    entry stream length so single-token rewrites cannot cycle forever.
    """
    stream = tuple(tokenize_sentence(sentence).body)
    trace: list[tuple[str, tuple[int, int], Token]] = []
    for container in pipeline.containers:
        budget = len(stream)
        while budget > 0:
            spans = recognize_spans(container, stream)
            if not spans:
                break
            (i, j), tok = spans[0]
            stream = stream[:i - 1] + (tok,) + stream[j:]
            trace.append((container.name, (i, j), tok))
            budget -= 1
    accepted = (len(stream) == 1 and bool(pipeline.containers)
                and stream[0] in pipeline.containers[-1].triggers)
    return PipelineResult(stream, trace, accepted)


_CONTAINER_KEYS = {"triggers", "chains", "max_instances", "max_copies"}


def load_pipeline(path: str | Path) -> Pipeline:
    """Load an INI pipeline config.

    Sections are `[container NAME]` with keys `triggers` (comma-separated
    categories), `chains` (chain-store path, relative to the config), and
    optional `max_instances` / `max_copies`.
    """
    path = Path(path)
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as handle:
        parser.read_file(handle)

    containers: list[Container] = []
    for section in parser.sections():
        parts = section.split()
        if len(parts) != 2 or parts[0] != "container":
            raise ValueError(f"bad section [{section}]: expected [container NAME]")
        name = parts[1]
        options = parser[section]
        unknown = set(options) - _CONTAINER_KEYS
        if unknown:
            raise ValueError(f"[{section}] has unknown keys: {', '.join(sorted(unknown))}")
        if "triggers" not in options or "chains" not in options:
            raise ValueError(f"[{section}] needs 'triggers' and 'chains'")
        triggers = frozenset(Token.category(label.strip())
                             for label in options["triggers"].split(",") if label.strip())
        store_path = Path(options["chains"])
        if not store_path.is_absolute():
            store_path = path.parent / store_path
        store = load_store(store_path.read_text(encoding="utf-8"))
        search = SearchConfig(
            max_instances=options.getint("max_instances", fallback=None),
            max_copies_per_chain=options.getint("max_copies", fallback=3))
        containers.append(Container(name, store, triggers, search))
    return Pipeline(tuple(containers))
