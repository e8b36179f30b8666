#!/usr/bin/env python3
"""
Script to run a Celery worker for distributed seesaw restarts and sweep trials.
"""
from bellbound.celery_app import celery_app

if __name__ == "__main__":
    celery_app.worker_main(["worker", "--loglevel=info"])
