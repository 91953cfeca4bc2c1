import os
import yaml
import logging
from fractions import Fraction
from typing import Any, Dict, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator

from models.market_model import TieRule
from solver.welfare import WelfareMode
from utils.rational import to_fraction

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

ENV_PREFIX = "SUGARTAX_"


class RunConfig(BaseModel):
    """Settings of one CLI run"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    welfare_mode: WelfareMode = WelfareMode.DEFINITION
    oracle: bool = False
    grid_step: Optional[Fraction] = None
    alpha_step: Fraction = Fraction(1, 20)
    out: Optional[str] = None
    precision: int = Field(default=2, ge=0, le=12)
    tie_rule: Optional[TieRule] = None
    workers: int = Field(default=1, ge=1)
    samples: int = Field(default=21, ge=2)

    @field_validator("grid_step", "alpha_step", mode="before")
    @classmethod
    def _coerce_step(cls, value: Any) -> Optional[Fraction]:
        if value is None:
            return None
        step = to_fraction(str(value) if isinstance(value, float) else value)
        if step <= 0:
            raise ValueError(f"Steps must be positive, got {value}")
        return step


class Config:
    """Configuration management for the solver"""

    _instance = None
    _initialized = False

    def __new__(cls):
        """Singleton pattern to ensure only one instance exists"""
        if cls._instance is None:
            cls._instance = super(Config, cls).__new__(cls)
        return cls._instance

    def __init__(self):
        """Initialize the configuration"""
        if self._initialized:
            return

        self.config_dir = os.path.dirname(os.path.abspath(__file__))
        self.base_dir = os.path.dirname(self.config_dir)

        self.solver_config = self._load_config("solver.yaml")

        self._initialized = True

    def _load_config(self, filename: str) -> Dict[str, Any]:
        """Load a YAML configuration file

        Args:
            filename: The name of the configuration file

        Returns:
            The configuration data, empty when the file is missing or broken
        """
        config_path = os.path.join(self.config_dir, filename)
        try:
            with open(config_path, 'r') as file:
                config = yaml.safe_load(file)
                logger.debug(f"Loaded configuration from {config_path}")
                return config or {}
        except Exception as e:
            logger.warning(f"Failed to load configuration from {config_path}: {str(e)}")
            return {}

    def get_env(self, key: str, default: Any = None) -> Any:
        """Get an environment variable

        Args:
            key: The name of the environment variable
            default: Default value if not found

        Returns:
            The value of the environment variable
        """
        return os.getenv(key, default)

    def get_setting(self, key: str, default: Any = None) -> Any:
        """Get a solver setting; SUGARTAX_<KEY> in the environment wins over the YAML file

        Args:
            key: The setting name as written in solver.yaml
            default: Default value if set nowhere

        Returns:
            The setting value
        """
        env_value = self.get_env(f"{ENV_PREFIX}{key.upper()}")
        if env_value is not None and env_value != "":
            return env_value
        return self.solver_config.get(key, default)

    def run_config(self, **overrides: Any) -> RunConfig:
        """Build the run settings: CLI overrides > environment > YAML > defaults

        Args:
            **overrides: Values given on the command line; None means not given

        Returns:
            The validated run configuration
        """
        values: Dict[str, Any] = {}
        for name in RunConfig.model_fields:
            value = self.get_setting(name)
            if value is not None:
                values[name] = value
        values.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig(**values)

    def get_log_dir(self) -> Optional[str]:
        """Directory for rotating log files, None for stderr only"""
        log_dir = self.get_setting("log_dir")
        if not log_dir:
            return None
        if not os.path.isabs(log_dir):
            log_dir = os.path.join(self.base_dir, log_dir)
        return log_dir


# Create a singleton instance
config = Config()
