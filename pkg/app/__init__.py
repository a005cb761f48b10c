from flask import Flask, make_response, request
from flask_cors import CORS

from app.utils.logger import logger
from app.utils.settings import CORS_ORIGINS, MAX_CONTENT_LENGTH


def create_app():
    app = Flask(__name__)
    app.config['MAX_CONTENT_LENGTH'] = MAX_CONTENT_LENGTH

    CORS(app,
         origins=CORS_ORIGINS,
         allow_headers=["Content-Type", "X-Requested-With"],
         methods=["GET", "POST", "OPTIONS"])

    # Preflight requests are answered before routing
    @app.before_request
    def handle_preflight():
        if request.method == "OPTIONS":
            response = make_response()
            origin = request.headers.get('Origin')
            response.headers.add("Access-Control-Allow-Origin", origin if origin in CORS_ORIGINS else CORS_ORIGINS[0])
            response.headers.add('Access-Control-Allow-Headers', "Content-Type,X-Requested-With")
            response.headers.add('Access-Control-Allow-Methods', "GET,POST,OPTIONS")
            return response

    from app.blueprints.simulation import simulation_bp
    from app.blueprints.estimation import estimation_bp
    from app.blueprints.asymptotics import asymptotics_bp

    app.register_blueprint(simulation_bp, url_prefix='/api/v1/simulation')
    app.register_blueprint(estimation_bp, url_prefix='/api/v1/estimation')
    app.register_blueprint(asymptotics_bp, url_prefix='/api/v1/asymptotics')

    logger.info("Registered URLs:")
    for rule in app.url_map.iter_rules():
        logger.info(rule)

    return app
