import logging
import os
import sys
from logging.handlers import RotatingFileHandler

from dotenv import load_dotenv

load_dotenv()

# Create log directory if it doesn't exist
LOG_DIR = os.getenv("SPECV_LOG_DIR", os.path.join(os.getcwd(), "log"))
if not os.path.exists(LOG_DIR):
    os.makedirs(LOG_DIR, exist_ok=True)

LOG_FILE = os.path.join(LOG_DIR, "app.log")

logger = logging.getLogger("specv")

formatter = logging.Formatter("%(asctime)s [%(levelname)s] - %(module)s - %(message)s", datefmt="%Y-%m-%d %H:%M:%S")

# Rotating file handler (max size 50MB, 1 backup)
if not logger.handlers:
    handler = RotatingFileHandler(LOG_FILE, maxBytes=50 * 1024 * 1024, backupCount=1)
    handler.setFormatter(formatter)
    logger.addHandler(handler)

    if os.getenv("SPECV_LOG_STDERR", "0") == "1":
        stream = logging.StreamHandler(sys.stderr)
        stream.setFormatter(formatter)
        logger.addHandler(stream)

ENV_MODE = os.getenv("SPECV_ENV", "development")

if ENV_MODE == "production":
    logger.setLevel(logging.ERROR)  # Only log errors in production
else:
    logger.setLevel(logging.DEBUG)

logger.info(f"Logger initialized in {ENV_MODE} mode")
