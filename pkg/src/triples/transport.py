"""HTTP plumbing shared by the chat and embedding gateways."""

from __future__ import annotations

import time

import requests

RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


class GatewayError(RuntimeError):
    """Remote call failed after exhausting its retry budget."""


def post_json(
    url: str,
    payload: dict,
    headers: dict[str, str],
    timeout: float,
    max_retries: int,
    backoff_base: float = 0.5,
    sleep=time.sleep,
) -> dict:
    """POST with bounded exponential backoff on transport errors and 5xx/429."""
    last = "no attempt made"
    for attempt in range(max_retries + 1):
        if attempt:
            sleep(backoff_base * 2 ** (attempt - 1))
        try:
            resp = requests.post(url, json=payload, headers=headers, timeout=timeout)
        except requests.RequestException as err:
            last = f"transport error: {err}"
            continue
        if resp.status_code in RETRYABLE_STATUS:
            last = f"HTTP {resp.status_code}"
            continue
        if resp.status_code >= 400:
            raise GatewayError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()
        except ValueError as err:
            raise GatewayError(f"non-JSON response: {err}") from err
    raise GatewayError(f"gave up after {max_retries + 1} attempt(s); last: {last}")
