"""Typed symbolic reasoning over structural scene representations.

Scenes are small sets of attributed, positioned objects; questions about
them compile to postfix programs over a typed token catalog; a deterministic
executor answers the programs and scores exact-match rewards.  Profiles
describe the attribute vocabularies, spatial relations, and bounds of a
domain, and everything downstream (catalog, codec, templates) derives from
the profile.
"""

from .codec import decode_compact, decode_scenes, encode_compact, encoded_length, encode_scenes
from .datasets import Dataset, ItemRecord, load_dataset, records_from_items, write_dataset
from .errors import (
    CodecError,
    ExecutionError,
    ProfileError,
    ProgramError,
    QuestionParseError,
    SceneError,
    SceneLangError,
    TemplateError,
)
from .executor import (
    ERROR,
    BoolVal,
    EntryVal,
    NumberVal,
    ObjectVal,
    Outcome,
    SceneVal,
    StepRecord,
    answer_reward,
    execute,
    update_baseline,
    value_from_json,
    value_to_json,
)
from .metrics import Metrics, dataset_stats, evaluate
from .profiles import (
    BUILTIN_PROFILES,
    DomainProfile,
    builtin_profile,
    load_profile,
    profile_from_dict,
    profile_to_dict,
    taxonomy_leaves,
)
from .programs import (
    Catalog,
    Node,
    Program,
    TokenSpec,
    TypeReport,
    ValueType,
    build_catalog,
    linearize,
    program_from_text,
    program_to_text,
    random_program,
    type_check,
)
from .scenes import ObjectRecord, Scene, Violation, relation_set, scene_from_dict, scene_to_dict, validate_scene
from .templates import (
    BUILTIN_TEMPLATE_PACKS,
    QAItem,
    Template,
    builtin_template_pack,
    generate_dataset,
    instantiate,
    load_template_pack,
    parse_question,
    render_text,
    sample_scene,
)

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_PROFILES",
    "BUILTIN_TEMPLATE_PACKS",
    "BoolVal",
    "Catalog",
    "CodecError",
    "Dataset",
    "DomainProfile",
    "ERROR",
    "EntryVal",
    "ExecutionError",
    "ItemRecord",
    "Metrics",
    "Node",
    "NumberVal",
    "ObjectRecord",
    "ObjectVal",
    "Outcome",
    "Program",
    "ProfileError",
    "ProgramError",
    "QAItem",
    "QuestionParseError",
    "Scene",
    "SceneError",
    "SceneLangError",
    "SceneVal",
    "StepRecord",
    "Template",
    "TemplateError",
    "TokenSpec",
    "TypeReport",
    "ValueType",
    "Violation",
    "answer_reward",
    "build_catalog",
    "builtin_profile",
    "builtin_template_pack",
    "dataset_stats",
    "decode_compact",
    "decode_scenes",
    "encode_compact",
    "encode_scenes",
    "encoded_length",
    "evaluate",
    "execute",
    "generate_dataset",
    "instantiate",
    "linearize",
    "load_dataset",
    "load_profile",
    "load_template_pack",
    "parse_question",
    "profile_from_dict",
    "profile_to_dict",
    "program_from_text",
    "program_to_text",
    "random_program",
    "records_from_items",
    "relation_set",
    "render_text",
    "sample_scene",
    "scene_from_dict",
    "scene_to_dict",
    "taxonomy_leaves",
    "type_check",
    "update_baseline",
    "validate_scene",
    "value_from_json",
    "value_to_json",
    "write_dataset",
]
