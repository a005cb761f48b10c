import os
from dotenv import load_dotenv

# Environment-driven process settings; experiment parameters live in config files
load_dotenv()

ENV_MODE = os.getenv("SPECV_ENV", "development")
DEFAULT_WORKERS = int(os.getenv("SPECV_WORKERS", "1"))
DEFAULT_OUTPUT_DIR = os.getenv("SPECV_OUTPUT_DIR", os.path.join(os.getcwd(), "output"))
CORS_ORIGINS = os.getenv("CORS_ORIGINS", "http://localhost:5173,http://localhost:5174").split(",")
MAX_CONTENT_LENGTH = int(os.getenv("MAX_CONTENT_LENGTH", str(100 * 1024 * 1024)))

# Numerical constants shared across modules
PSD_TOLERANCE = 1e-12
VARIANCE_FLOOR = 1e-8
GROUND_TRUTH_TOLERANCE = 1e-12
DEFAULT_QUAD_POINTS = 64
