"""Path-based knowledge graph completion: graph loading, path sampling,
statements, PEMB embedding files, ranking metrics and the CLI pipeline."""

from ._pathkg import (
    ConfigError,
    Error,
    FormatError,
    Graph,
    IoError,
    MissingEmbeddingError,
    ParseError,
    SamplingError,
    average_precision,
    entity_statement,
    enumerate_paths,
    hash_encode,
    load_graph,
    make_synth,
    mean_average_precision,
    path_statement,
    read_pemb,
    run_cli,
    sample_paths,
    statement_key,
    write_pemb,
)

__all__ = [
    "ConfigError",
    "Error",
    "FormatError",
    "Graph",
    "IoError",
    "MissingEmbeddingError",
    "ParseError",
    "SamplingError",
    "average_precision",
    "entity_statement",
    "enumerate_paths",
    "hash_encode",
    "load_graph",
    "make_synth",
    "mean_average_precision",
    "path_statement",
    "read_pemb",
    "run_cli",
    "sample_paths",
    "statement_key",
    "write_pemb",
]
