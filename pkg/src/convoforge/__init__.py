"""convoforge: conversational human-robot collaboration at desk scale.

A dialogue engine with slot elicitation and API dispatch, a canonical JSON
wire protocol served over HTTP with a server-push event stream, a simulated
collaborative-assembly back-end, a rigid request-response baseline, and a
seeded experiment harness comparing the two interaction modes.
"""

from importlib import resources

from .schema import DialogueSchema, parse_schema
from .sim import TaskConfig, load_task

__version__ = "0.1.0"

DEFAULT_PORT = 8732
PORT_ENV_VAR = "CONVOFORGE_PORT"


def default_schema_text() -> str:
    return resources.files("convoforge.data").joinpath("assembly.schema.json").read_text("utf-8")


def default_task_text() -> str:
    return resources.files("convoforge.data").joinpath("assembly.task.json").read_text("utf-8")


def default_schema() -> DialogueSchema:
    return parse_schema(default_schema_text())


def default_task() -> TaskConfig:
    return load_task(default_task_text())
