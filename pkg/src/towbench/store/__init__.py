"""Relational storage of episodes, search trees, and counterfactual twins."""

from .artifact import (
    ArtifactError,
    EpisodeArtifact,
    action_pair_row,
    content_hash_of,
    parse_episode,
    read_episode,
    tree_lines,
    write_episode,
)
from .counterfactual import materialize_counterfactuals
from .schema import (
    ACTION_COLUMNS,
    CLASS_NAMESPACES,
    NAMESPACE_COLUMNS,
    RULE_CLASSES,
    SCHEMA_VERSION,
    STATE_COLUMNS,
    STATE_NAMESPACE_COLUMNS,
    WINPROB_ALIASES,
    WINPROB_COLUMNS,
    catalog_dict,
    resolve_attribute,
)
from .tables import (
    TRANSFORMS,
    EpisodeInfo,
    NotFoundError,
    StoreError,
    TreeStore,
)

__all__ = [name for name in dir() if not name.startswith("_")]
