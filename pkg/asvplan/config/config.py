#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import logging
import os
from contextlib import contextmanager

import yaml
from omegaconf import OmegaConf


_UNSET = object()


class AsvPlanConfig:
    """
    Configuration object used to store configurable parameters for asvplan.

    This object acts as a nested dictionary, but can be queried using dot-notation(
    e.g. querying or setting `cfg.a.b` is equivalent to `cfg['a']['b']`).

    Users can load a config from a file using `cfg.load_config(filepath)` and
    merge planner override files written as `key = value` lines using
    `cfg.load_overrides(filepath)`.

    Users can temporarily override a config parameter using the contextmanager temp_override:

        .. code-block:: python

        cfg.a.b = outer     # sets cfg["a"]["b"] to outer value

        with cfg.temp_override({"a.b": inner}):
            print(cfg.a.b)  # prints inner value

        print(cfg.a.b)  # prints outer value
    """

    __DEFAULT_CONFIG_PATH = os.path.normpath(
        os.path.join(__file__, "../../../configs/default.yaml")
    )

    def __init__(self, config_file=None):
        self.load_config(config_file)

    @classmethod
    def get_default_config_path(cls):
        return cls.__DEFAULT_CONFIG_PATH

    def load_config(self, config_file):
        """Loads config from a yaml file, layered over the defaults"""
        default_file = AsvPlanConfig.__DEFAULT_CONFIG_PATH
        with open(default_file) as stream:
            config = OmegaConf.create(yaml.safe_load(stream))
        if config_file is not None and os.path.abspath(
            config_file
        ) != os.path.abspath(default_file):
            # Use yaml to open stream for safe load
            with open(config_file) as stream:
                update = yaml.safe_load(stream) or {}
            config = OmegaConf.merge(config, OmegaConf.create(update))
            logging.info(f"Loaded config overrides from {config_file}")
        self.config = config

    def load_overrides(self, override_file):
        """Merges `key = value` lines (dotted keys, `#` comments) into the config"""
        dotlist = []
        with open(override_file) as stream:
            for lineno, line in enumerate(stream, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(
                        f"{override_file}:{lineno}: expected `key = value`, got {line!r}"
                    )
                key, value = (part.strip() for part in line.split("=", 1))
                if OmegaConf.select(self.config, key, default=_UNSET) is _UNSET:
                    raise ValueError(f"{override_file}:{lineno}: unknown key {key}")
                dotlist.append(f"{key}={value}")
        self.config = self._merged(dotlist)

    def set_config(self, config):
        if isinstance(config, AsvPlanConfig):
            self.config = config.config
        else:
            self.config = config

    def to_container(self):
        return OmegaConf.to_container(self.config, resolve=True)

    def _merged(self, dotlist):
        return OmegaConf.merge(self.config, OmegaConf.from_dotlist(list(dotlist)))

    def __getattribute__(self, name):
        try:
            return object.__getattribute__(self, name)
        except AttributeError:
            value = OmegaConf.select(self.config, name, default=_UNSET)
            if value is _UNSET:
                raise AttributeError(f"unknown config key {name}") from None
            return value

    def __getitem__(self, name):
        return self.__getattribute__(name)

    def __setattr__(self, name, value):
        if name == "config" or name in type(self).__dict__:
            object.__setattr__(self, name, value)
        else:
            self.config = self._merged([f"{name}={value}"])

    def __setitem__(self, name, value):
        self.__setattr__(name, value)

    @contextmanager
    def temp_override(self, override_dict):
        """Applies dotted-key overrides for the duration of a `with` block"""
        previous = self.config
        try:
            self.config = self._merged(f"{k}={v}" for k, v in override_dict.items())
            yield
        finally:
            self.config = previous
