"""Human-facing surface: parser, serializer, script runner and examples."""

from .examples import list_examples, run_example
from .parser import parse_expr
from .script import run_script
from .serialize import serialize, to_json, to_text

__all__ = ["list_examples", "parse_expr", "run_example", "run_script", "serialize", "to_json", "to_text"]
