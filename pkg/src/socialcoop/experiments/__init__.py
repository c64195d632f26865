"""Config-driven experiment pipeline and CLI."""
