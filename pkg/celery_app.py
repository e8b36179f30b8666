# Worker entry point: `celery -A celery_app worker --loglevel=info`
from bellbound.celery_app import celery_app  # noqa: F401
