"""
SocLearn - Configuration Loader
Parses the optional XML run-configuration file and layers it under command-line flags
"""

import os
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Union

from lxml import etree

from .exceptions import ConfigurationError

OUTPUT_DIR_ENV = "SOCLEARN_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "soclearn-output"

# Experimental environment: 40 agents, N(-1, 4) / N(1, 4) signals, sparse and dense networks
EXPERIMENT_DEFAULTS: Dict[str, Any] = {
    "q": [0.25, 0.75],
    "agents": 40,
    "mu": 1.0,
    "sigma": 2.0,
    "trials": 130,
    "seed": 20170307,
    "behavior": "naive",
    "topology": "sequential",
    "ell_variant": "calibrated",
    "choice_variant": "calibrated",
    "se_flavor": "HC1",
    "format": "csv",
    "parallelism": 1,
    "naive_share": 1.0,
    "epsilon": 0.0,
    "report": "all",
}


def _float_list(text: str):
    return [float(token) for token in text.split()]


def _flag(text: str) -> bool:
    return text.strip().lower() in ("1", "true", "yes", "on")


CONVERTERS: Dict[str, Callable[[str], Any]] = {
    "q": _float_list,
    "agents": int,
    "mu": float,
    "sigma": float,
    "trials": int,
    "seed": int,
    "parallelism": int,
    "naive_share": float,
    "epsilon": float,
    "svg": _flag,
    "strict_bound": _flag,
}


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR))


class ConfigLoader:
    """Loads run parameters from an XML file such as

    <soclearn>
      <metadata><name>dense sweep</name></metadata>
      <defaults><mu>1</mu><sigma>2</sigma></defaults>
      <simulate><trials>10000</trials><q>0.25 0.75</q></simulate>
    </soclearn>
    """

    def __init__(self, config_path: Optional[Union[str, Path]] = None):
        """
        Initialize configuration loader

        Args:
            config_path: Path to an XML configuration file. If None, only experiment
                defaults apply.
        """
        self.config_path = Path(config_path) if config_path is not None else None
        self.root = None
        if self.config_path is None:
            return
        if not self.config_path.exists():
            raise FileNotFoundError(f"Configuration file not found: {self.config_path}")
        try:
            self.root = etree.parse(str(self.config_path)).getroot()
        except etree.XMLSyntaxError as exc:
            raise ConfigurationError(f"cannot parse {self.config_path}: {exc}") from exc

    def load_section(self, name: str) -> Dict[str, Any]:
        """
        Typed values of one section

        Args:
            name: Section element name, e.g. 'defaults' or a subcommand like 'simulate'

        Returns:
            Dictionary keyed like the long command-line flags (dashes as underscores)
        """
        values: Dict[str, Any] = {}
        if self.root is None:
            return values
        section = self.root.find(name.replace("-", "_"))
        if section is None:
            return values
        for child in section:
            if not isinstance(child.tag, str) or child.text is None:
                continue
            key = child.tag
            try:
                values[key] = CONVERTERS.get(key, str)(child.text.strip())
            except ValueError as exc:
                raise ConfigurationError(f"bad value for <{key}> in <{name}>: {child.text!r}") from exc
        return values

    def resolve(self, command: str, flags: Mapping[str, Any]) -> Dict[str, Any]:
        """
        Merge experiment defaults, the file's defaults and command sections, and explicit flags

        Flags set to None count as not given.
        """
        merged = dict(EXPERIMENT_DEFAULTS)
        merged.update(self.load_section("defaults"))
        merged.update(self.load_section(command))
        merged.update({key: value for key, value in flags.items() if value is not None})
        return merged

    def get_metadata(self) -> Dict[str, str]:
        """
        Extract configuration metadata

        Returns:
            Dictionary of the <metadata> children's text
        """
        metadata = {}
        if self.root is None:
            return metadata
        meta_elem = self.root.find("metadata")
        if meta_elem is not None:
            for child in meta_elem:
                if isinstance(child.tag, str) and child.text:
                    metadata[child.tag] = child.text.strip()
        return metadata
