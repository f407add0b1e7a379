import os

from dotenv import load_dotenv

from app.exceptions import ConfigurationException


def get_env_variable_safe(key: str, default: str = "") -> str:
    """
    Read an environment variable, loading ``.env`` first.

    Args:
        key: The environment variable key
        default: Default value if key is not found

    Returns:
        str: The environment variable value or default
    """
    load_dotenv()
    return os.getenv(key, default)


def get_env_int(key: str, default: int, minimum: int = 1) -> int:
    """
    Read an integer setting, falling back to ``default`` when unset.

    Raises:
        ConfigurationException: If the value is not an integer or is below ``minimum``
    """
    raw = get_env_variable_safe(key, str(default)).strip()
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigurationException(
            message=f"Environment variable '{key}' must be an integer, got '{raw}'",
            config_key=key,
            expected_type="int",
        ) from e
    if value < minimum:
        raise ConfigurationException(
            message=f"Environment variable '{key}' must be >= {minimum}, got {value}",
            config_key=key,
            expected_type="int",
        )
    return value


def get_env_bool(key: str, default: bool = False) -> bool:
    """Read a boolean setting; accepts true/false, 1/0, yes/no."""
    raw = get_env_variable_safe(key, "true" if default else "false").strip().lower()
    return raw in ("1", "true", "yes", "on")
