from .settings import CheckerSettings, get_settings

__all__ = ["CheckerSettings", "get_settings"]
