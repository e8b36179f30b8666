# Tasks are registered through the `include` list of bellbound.celery_app;
# importing them here would create a cycle with the services that dispatch them.
__all__ = []
