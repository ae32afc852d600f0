"""Shared HTTP plumbing for remote providers: JSON POST with retry/backoff."""

from __future__ import annotations

import logging
import os
import time

import requests

from .errors import ProviderError

logger = logging.getLogger(__name__)


def auth_headers(api_key_env):
    """Bearer-token headers from an environment variable, if configured."""
    if not api_key_env:
        return {}
    key = os.environ.get(api_key_env, "")
    if not key:
        return {}
    return {"Authorization": f"Bearer {key}"}


def post_json(url, payload, *, headers=None, retries=3, backoff=0.5, timeout=30.0):
    """POST ``payload`` as JSON, retrying on transport and 5xx/429 failures.

    Raises ProviderError (with attempt count and last HTTP status) once
    ``retries`` attempts are exhausted.
    """
    last_status = None
    last_err = None
    for attempt in range(1, retries + 1):
        try:
            resp = requests.post(url, json=payload, headers=headers or {}, timeout=timeout)
            last_status = resp.status_code
            if resp.status_code == 200:
                return resp.json()
            if resp.status_code not in (429, 500, 502, 503, 504):
                raise ProviderError(
                    f"POST {url} failed with HTTP {resp.status_code}",
                    attempts=attempt,
                    last_status=resp.status_code,
                )
            last_err = f"HTTP {resp.status_code}"
        except requests.RequestException as exc:
            last_err = str(exc)
        if attempt < retries:
            delay = backoff * (2 ** (attempt - 1))
            logger.debug("retrying %s in %.2fs (%s)", url, delay, last_err)
            time.sleep(delay)
    raise ProviderError(
        f"POST {url} failed after {retries} attempts: {last_err}",
        attempts=retries,
        last_status=last_status,
    )
