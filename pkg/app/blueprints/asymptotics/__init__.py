from flask import Blueprint

asymptotics_bp = Blueprint('asymptotics', __name__)

# Routes register themselves on import, after the blueprint exists
from . import views  # noqa: E402,F401
