"""Design analysis for a gripper-driven scissor-linkage screwing tool."""

from .params import (ConfigError, DomainError, GripperParams, ParamsInvalid,
                     ToolParams, load_params, save_params, validate)

__all__ = ["ConfigError", "DomainError", "GripperParams", "ParamsInvalid",
           "ToolParams", "load_params", "save_params", "validate"]
__version__ = "0.1.0"
