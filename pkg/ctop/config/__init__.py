"""Loads run configuration from the .cfg files in this directory."""
import os

import flask

CONFIG_DIR = os.path.dirname(os.path.abspath(__file__))
ENV_VARIABLE = "CTOP_ENV"


def load_config(env=None, overrides=None):
    """
    Reads default.cfg, then <env>.cfg when it exists, then `overrides`.
    `env` falls back to the CTOP_ENV environment variable.
    """
    config = flask.Config(CONFIG_DIR)
    config.from_pyfile("default.cfg")

    env = env or os.environ.get(ENV_VARIABLE)
    if env:
        config.from_pyfile("{}.cfg".format(env), silent=True)

    if overrides and isinstance(overrides, dict):
        config.from_mapping(overrides)

    return config
