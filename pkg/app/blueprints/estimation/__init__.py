from flask import Blueprint

estimation_bp = Blueprint('estimation', __name__)

# Routes register themselves on import, after the blueprint exists
from . import views  # noqa: E402,F401
