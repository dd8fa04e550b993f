"""qganfinance - Wasserstein quantum GAN for synthetic financial return series."""

__version__ = "0.1.0"


def get_settings() -> object:
    """Get settings instance."""
    from qganfinance.settings import settings  # noqa: PLC0415

    return settings


__all__ = ["__version__", "get_settings"]
