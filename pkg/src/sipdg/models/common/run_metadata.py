"""Run metadata attached to every command.

Kept out of the CSV files on purpose: the CSV output of a run must be
byte-identical between repetitions, while timings are not.
"""
from typing import Any, Dict

from pydantic import BaseModel, Field


class RunMetadata(BaseModel):
    """Provenance of a command line run.

    Contains the subcommand, the effective parameters, the package version
    and the wall time of the run.
    """
    command: str = Field(description="CLI subcommand that was executed")
    parameters: Dict[str, Any] = Field(default_factory=dict, description="Effective parameters")
    version: str = Field(description="Installed sipdg version")
    wall_time: float = Field(ge=0, description="Run time in seconds")
