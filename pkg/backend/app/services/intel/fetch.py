"""
Download helper for the Intel Lab dataset.
"""

import gzip
import hashlib
import logging
from pathlib import Path

import httpx
from tenacity import (
    after_log,
    before_log,
    retry,
    retry_if_exception_type,
    stop_after_attempt,
    wait_fixed,
)

from app.core.config import INTEL_DATA_FILE, INTEL_LOCATIONS_FILE, Settings
from app.core.config import settings as default_settings
from app.core.exceptions import ChecksumMismatch, FusionWorkbenchError

logger = logging.getLogger(__name__)

TIMEOUT_SECONDS = 60.0


def _download(client: httpx.Client, url: str) -> bytes:
    response = client.get(url)
    response.raise_for_status()
    return response.content


def fetch_intel_dataset(
    dest: Path | None = None,
    config: Settings = default_settings,
    client: httpx.Client | None = None,
) -> dict[str, Path]:
    """
    Download the mote data and location files into ``dest``.

    Gzipped payloads are decompressed before writing. When a SHA-256 is
    configured for a file, the written content must match it.
    """
    dest = dest or config.DATA_DIR
    dest.mkdir(parents=True, exist_ok=True)
    download = retry(
        stop=stop_after_attempt(config.FETCH_MAX_TRIES),
        wait=wait_fixed(config.FETCH_WAIT_SECONDS),
        retry=retry_if_exception_type(httpx.HTTPError),
        before=before_log(logger, logging.INFO),
        after=after_log(logger, logging.WARN),
        reraise=True,
    )(_download)

    targets = [
        (str(config.INTEL_DATA_URL), INTEL_DATA_FILE, config.INTEL_DATA_SHA256),
        (
            str(config.INTEL_LOCATIONS_URL),
            INTEL_LOCATIONS_FILE,
            config.INTEL_LOCATIONS_SHA256,
        ),
    ]
    own_client = client is None
    http = client or httpx.Client(timeout=TIMEOUT_SECONDS, follow_redirects=True)
    written: dict[str, Path] = {}
    try:
        for url, name, expected in targets:
            logger.info(f"Fetching {url}")
            try:
                payload = download(http, url)
            except httpx.HTTPError as e:
                raise FusionWorkbenchError(f"download of {url} failed: {e}")
            if url.endswith(".gz"):
                payload = gzip.decompress(payload)
            digest = hashlib.sha256(payload).hexdigest()
            if expected and digest != expected.lower():
                raise ChecksumMismatch(
                    f"{name}: expected sha256 {expected}, got {digest}"
                )
            path = dest / name
            path.write_bytes(payload)
            written[name] = path
            logger.info(f"Wrote {path} ({len(payload)} bytes, sha256 {digest})")
    finally:
        if own_client:
            http.close()
    return written
