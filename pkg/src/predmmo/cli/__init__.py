"""Command-line front end."""

from .config import SCHEMA_VERSION, load, parse, validate
from .recipes import names as recipe_names, recipe
from .runner import Outcome, run

__all__ = ["SCHEMA_VERSION", "load", "parse", "validate", "recipe_names", "recipe",
           "Outcome", "run"]
