from .config import settings, load_settings, configure, Settings

__all__ = ["settings", "load_settings", "configure", "Settings"]
