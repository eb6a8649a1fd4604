"""POST-with-retry shared by the remote embedding and generation clients."""
from __future__ import annotations

import logging
import time

import httpx

logger = logging.getLogger(__name__)

TRANSIENT_STATUS = frozenset({408, 409, 425, 429, 500, 502, 503, 504})


def _retry_after(response):
    value = response.headers.get("retry-after")
    try:
        return float(value) if value is not None else None
    except ValueError:
        return None


def post_json(client: httpx.Client, url: str, payload: dict, *, headers: dict,
              retries: int, backoff: float, error_cls, sleep=time.sleep) -> dict:
    """POST ``payload``; retry transport errors and transient statuses.

    ``retries`` counts extra attempts after the first. Raises ``error_cls``
    carrying status, attempts and retry_after once retries are exhausted or
    on a non-transient status (auth failures are never retried).
    """
    attempts = 0
    while True:
        attempts += 1
        try:
            response = client.post(url, json=payload, headers=headers)
        except httpx.HTTPError as exc:
            if attempts > retries:
                raise error_cls(f"transport error after {attempts} attempts: {exc}",
                                status=None, attempts=attempts) from exc
            delay = backoff * 2 ** (attempts - 1)
            logger.warning("transport error on %s (%s); retrying in %.2fs", url, exc, delay)
            sleep(delay)
            continue

        if response.status_code < 400:
            try:
                return response.json()
            except ValueError as exc:
                raise error_cls(f"invalid JSON response from {url}",
                                status=response.status_code, attempts=attempts) from exc

        retry_after = _retry_after(response)
        if response.status_code not in TRANSIENT_STATUS or attempts > retries:
            kind = "authentication failed" if response.status_code in (401, 403) else "request failed"
            raise error_cls(f"{kind} with HTTP {response.status_code}: {response.text[:200]}",
                            status=response.status_code, attempts=attempts,
                            retry_after=retry_after)
        delay = retry_after if retry_after is not None else backoff * 2 ** (attempts - 1)
        logger.warning("HTTP %s from %s; retrying in %.2fs", response.status_code, url, delay)
        sleep(delay)
