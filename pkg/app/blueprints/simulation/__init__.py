from flask import Blueprint

simulation_bp = Blueprint('simulation', __name__)

# Routes register themselves on import, after the blueprint exists
from . import views  # noqa: E402,F401
