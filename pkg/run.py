import os

from dotenv import load_dotenv

from app import create_app
from app.utils.logger import logger

# Load environment variables from .env
load_dotenv()

# gunicorn entry point: gunicorn run:app
app = create_app()


if __name__ == '__main__':
    ENV_MODE = os.getenv("SPECV_ENV", "development")
    debug = ENV_MODE == "development"
    logger.info(f"Running app in {ENV_MODE} mode")
    app.run(host='0.0.0.0', port=int(os.getenv("PORT", "5000")), debug=debug)
