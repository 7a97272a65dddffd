def resolve(value, default):
    """Return ``value`` unless it is None, in which case ``default``."""
    return default if value is None else value
