"""Recognition of sentences as closed complexes of bonded token chains.

Chains of word and category tokens are matched by attaching equal tokens
in pairs; a sentence is recognized when the chains close into a complex
with exactly one dangling conclusion that also admits a consistent
temporal embedding.  The package adds an independent slash-type
derivation engine, a CKY reference for grammar-shaped stores, container
pipelines for recursive phrases, and molecular-style geometry export.
"""

from .chains import (
    CATEGORY,
    WORD,
    Chain,
    ChainParseError,
    ChainStore,
    Token,
    consolidate,
    format_chain,
    load_store,
    parse_chain_line,
    tokenize_sentence,
)
from .complexes import (
    CONCLUSION,
    FRESH,
    Bond,
    ChainInstance,
    Complex,
    Occurrence,
    PositionAssignment,
    SearchConfig,
    ValidationReport,
    dangling_token,
    merged_classes,
    solve_positions,
    validate,
)
from .engine import RecognitionResult, enumerate_complexes, parity_filter, recognize
from .cfgref import (
    CrosscheckReport,
    ParseTree,
    cky_reference,
    cky_tree,
    crosscheck_store,
    is_pure,
    tree_to_complex,
)
from .categorial import (
    Atom,
    Derivation,
    Left,
    Lexicon,
    Right,
    TypedWord,
    apply_rule,
    derive,
    format_type,
    load_lexicon,
    parse_type,
    render_derivation,
)
from .containers import Container, Pipeline, PipelineResult, load_pipeline, recognize_spans, run_pipeline
from .geometry import (
    Layout,
    StyleMap,
    complex_from_json,
    embed,
    export_dot,
    export_json,
    export_xyz,
    load_style,
)

__version__ = "0.1.0"
