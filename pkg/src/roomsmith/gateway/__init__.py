from .api import ERROR_CODES, create_app

__all__ = ["ERROR_CODES", "create_app"]
