"""Find the APIs and modules a project reaches in a changed package."""

from .callgraph import CallGraph, CallGraphNode, build_on_demand_call_graph
from .calls import ApiUse, UseVisitor, extract_direct_api_calls
from .chains import PROJECT, ChangeTriple, dependency_graph, diff_assignments, find_call_chains
from .fqn import SIMILARITY_THRESHOLD, levenshtein, restore_fqn, similarity
from .imports import RawImport, derive_import_modules, entry_files_for, extract_import_apis, find_related_files
from .usage import (
    CHAIN,
    DIRECT,
    IMPORT_CLOSURE,
    ExtractionContext,
    Provenance,
    UsageSet,
    assemble_usage_set,
)

__all__ = [
    "CallGraph",
    "CallGraphNode",
    "build_on_demand_call_graph",
    "ApiUse",
    "UseVisitor",
    "extract_direct_api_calls",
    "PROJECT",
    "ChangeTriple",
    "dependency_graph",
    "diff_assignments",
    "find_call_chains",
    "SIMILARITY_THRESHOLD",
    "levenshtein",
    "restore_fqn",
    "similarity",
    "RawImport",
    "derive_import_modules",
    "entry_files_for",
    "extract_import_apis",
    "find_related_files",
    "CHAIN",
    "DIRECT",
    "IMPORT_CLOSURE",
    "ExtractionContext",
    "Provenance",
    "UsageSet",
    "assemble_usage_set",
]
