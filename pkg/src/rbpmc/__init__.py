"""Parameterized model checking of systems with rendezvous and broadcast."""

from .core import ProcessTemplate, ResourceLimitError, System, make_template, template_from_dict, template_to_dict
from .pmcp import Verdict, check_liveness, check_liveness_tn, check_safety, check_safety_tn
from .unwinding import build_unwinding

__all__ = [
    "ProcessTemplate",
    "ResourceLimitError",
    "System",
    "Verdict",
    "build_unwinding",
    "check_liveness",
    "check_liveness_tn",
    "check_safety",
    "check_safety_tn",
    "make_template",
    "template_from_dict",
    "template_to_dict",
]
