"""Knowledge acquisition: index metadata, source archives and code inventories."""

from .index import DEFAULT_INDEX, IndexClient
from .inventory import (
    KEYWORD_ONLY,
    POSITIONAL,
    ApiEntry,
    ApiInventory,
    ApiSignature,
    ModuleInventory,
    Param,
    build_api_inventory,
    build_module_inventory,
    build_simplification_map,
)
from .store import Dependency, Knowledge, KnowledgeStore

__all__ = [
    "DEFAULT_INDEX",
    "IndexClient",
    "KEYWORD_ONLY",
    "POSITIONAL",
    "ApiEntry",
    "ApiInventory",
    "ApiSignature",
    "ModuleInventory",
    "Param",
    "build_api_inventory",
    "build_module_inventory",
    "build_simplification_map",
    "Dependency",
    "Knowledge",
    "KnowledgeStore",
]
