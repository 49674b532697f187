"""Dynamic membership maintainers."""
from .base import Maintainer
from .constant import (BooleanMaintainer, CommutativeMaintainer, SingletonMaintainer, bm_update,
                       build_boolean, build_commutative, build_singleton, cm_update, sm_update)
from .general import GeneralMaintainer, build_general, default_k, gm_update, level_bound
from .naive import NaiveMaintainer, build_naive, nm_update
from .specs import (BooleanSpec, CommutativeSpec, SingletonSpec, SpecError, bounded_equivalence,
                    parse_formula, parse_spec, serialize_spec, spec_automaton)

__all__ = [
    "Maintainer", "NaiveMaintainer", "GeneralMaintainer", "CommutativeMaintainer",
    "SingletonMaintainer", "BooleanMaintainer", "build_naive", "build_general",
    "build_commutative", "build_singleton", "build_boolean", "nm_update", "gm_update",
    "cm_update", "sm_update", "bm_update", "default_k", "level_bound", "BooleanSpec",
    "CommutativeSpec", "SingletonSpec", "SpecError", "parse_spec", "parse_formula",
    "serialize_spec", "spec_automaton", "bounded_equivalence",
]
