import os
import uuid
import logging
from typing import Optional

from config import ENABLE_LOGGING, LOG_FILE_PATH


def ensure_directories(output_dir: Optional[str] = None):
    """Ensure that required directories exist"""
    os.makedirs("./app_data/config", exist_ok=True)
    os.makedirs("./app_data/logs", exist_ok=True)
    if output_dir:
        os.makedirs(output_dir, exist_ok=True)


def new_run_id() -> str:
    return uuid.uuid4().hex[:12]


# Configure logging
def setup_logging(console: bool = False, level: int = logging.INFO):
    handlers = []
    if ENABLE_LOGGING:
        os.makedirs(os.path.dirname(LOG_FILE_PATH), exist_ok=True)
        handlers.append(logging.FileHandler(LOG_FILE_PATH, encoding="utf-8"))
    if console:
        handlers.append(logging.StreamHandler())
    if not handlers:
        return
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(message)s",
        handlers=handlers,
    )


# Configure logging function
def log_event(tag: str, message: str, run: Optional[str] = None):
    run_id = run if run else "N/A"
    logging.info(f"[{tag}] {message} | run: {run_id}")
