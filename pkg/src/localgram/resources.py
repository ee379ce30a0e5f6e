"""Load lexicon, rules, graphs and schema from disk; locate the bundled demo set."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .graph import GraphSet, parse_graphs
from .lexicon import InflectionRules, Lexicon, build_index, parse_lexicon, parse_rules
from .schema import SchemaConfig, parse_schema

DEMO_DIR = Path(__file__).parent / "data"
GRAPH_SUFFIX = ".lgg"


def read_text(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def load_lexicon(path: str | Path, rules_path: str | Path | None = None) -> Lexicon:
    lex = parse_lexicon(read_text(path))
    rules: InflectionRules | None = parse_rules(read_text(rules_path)) if rules_path else None
    return build_index(lex, rules)


def load_graphs(path: str | Path, main: str) -> GraphSet:
    """Read every ``*.lgg`` file under a directory (sorted by name), or one file."""
    path = Path(path)
    files = sorted(path.glob(f"*{GRAPH_SUFFIX}")) if path.is_dir() else [path]
    if not files:
        raise FileNotFoundError(f"no {GRAPH_SUFFIX} files in {path}")
    gs = GraphSet(main)
    for f in files:
        for g in parse_graphs(read_text(f)):
            gs.add(g)
    return gs


def load_schema(path: str | Path) -> SchemaConfig:
    return parse_schema(read_text(path))


@dataclass
class DemoPaths:
    lexicon: Path = DEMO_DIR / "lexicon.dic"
    rules: Path = DEMO_DIR / "inflection.rules"
    graphs: Path = DEMO_DIR / "graphs"
    schema: Path = DEMO_DIR / "clothing.schema"
    corpus: Path = DEMO_DIR / "corpus.txt"
    golden: Path = DEMO_DIR / "corpus.golden.txt"
    gold: Path = DEMO_DIR / "corpus.gold.txt"
    main: str = "ASPECT_VALUE"


DEMO = DemoPaths()
