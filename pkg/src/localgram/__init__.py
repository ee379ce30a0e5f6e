"""Local-grammar annotation engine: lexicon, graphs, RTN compiler, annotator,
evaluation-triple schema and span scoring."""
from .annotator import annotate, annotate_corpus, suggest
from .compiler import INFINITE, compile_graphset, count_paths, flatten
from .document import AnnotatedDoc, Annotation, Token, tokenize
from .evaluation import EvalReport, align, score
from .graph import GraphSet, emit_dot, parse_graph, parse_graphs, validate_graphset
from .lexicon import build_index, inflect, parse_lexicon, parse_rules, resolve_mask
from .schema import derive_sentiment, export_bio, parse_annotated, parse_schema, validate_label

__version__ = "0.1.0"
