from celery import Celery

from bellbound.config import settings

celery_app = Celery(
    "bellbound",
    broker=settings.celery_broker_url,
    backend=settings.celery_result_backend,
    include=["bellbound.tasks.seesaw_task"],
)

celery_app.conf.update(
    task_serializer="json",
    accept_content=["json"],
    result_serializer="json",
    timezone="UTC",
    enable_utc=True,
    task_track_started=True,
    task_time_limit=6 * 3600,  # a d=8 restart batch can run for hours
    task_always_eager=settings.celery_always_eager,
    task_eager_propagates=True,
)
