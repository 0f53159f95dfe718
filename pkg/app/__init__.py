import os
import logging
from flask import Flask
from flask_sqlalchemy import SQLAlchemy
from dotenv import load_dotenv
from flask_limiter import Limiter
from flask_limiter.util import get_remote_address
from werkzeug.middleware.proxy_fix import ProxyFix

# Load environment variables
load_dotenv()

# Initialize extensions
db = SQLAlchemy()
limiter = Limiter(key_func=get_remote_address, default_limits=[])


def create_app(config=None):
    """Application factory pattern"""
    app = Flask(__name__)

    # Trust a single reverse proxy for client addresses used by the rate limiter
    app.wsgi_app = ProxyFix(app.wsgi_app, x_for=1, x_proto=1)

    # Load env-specific config class
    try:
        env_name = os.getenv("FLASK_ENV", "production")
        cfg_map = {
            "development": "app.config.DevelopmentConfig",
            "testing": "app.config.TestingConfig",
            "production": "app.config.ProductionConfig",
        }
        app.config.from_object(cfg_map.get(env_name, "app.config.Config"))
    except Exception:
        app.config.from_object("app.config.Config")
    if config:
        app.config.update(config)

    db.init_app(app)
    try:
        # support semicolon or comma separated limits
        default_limits = []
        raw = app.config.get("RATELIMIT_DEFAULT")
        if raw:
            default_limits = [
                p.strip() for p in str(raw).replace(",", ";").split(";") if p.strip()
            ]
        limiter._default_limits = default_limits
        limiter.init_app(app)
    except Exception:
        limiter.init_app(app)

    setup_logging(app)

    # Fail-fast on weak/missing secret when serving in production
    if (
        app.config.get("REQUIRE_SECRET_KEY", True)
        and not app.debug
        and app.config.get("FLASK_ENV", "production") == "production"
    ):
        secret = app.config.get("SECRET_KEY")
        placeholder_values = {"dev-secret-key-change-in-production", "your-secret-key-here"}
        if (not secret) or (secret in placeholder_values) or (isinstance(secret, str) and len(secret) < 32):
            app.logger.error("Invalid SECRET_KEY configured in production; refusing to start")
            raise RuntimeError("Invalid SECRET_KEY in production")

    # Register models so db.create_all() sees them
    from app import models  # noqa: F401

    from app.routes.api import api_bp

    app.register_blueprint(api_bp)

    from app.utils.error_handlers import register_error_handlers

    register_error_handlers(app)

    from app.utils.cli import register_cli_commands

    register_cli_commands(app)

    app.logger.info("rsp-cycles %s started (%s)", app.config.get("APP_VERSION"), app.config.get("FLASK_ENV"))
    return app


def setup_logging(app):
    """Setup application logging.

    ``LOG_LEVEL`` applies to the app logger and the shared handlers;
    ``DYNAMICS_LOG_LEVEL`` (default: ``LOG_LEVEL``) applies to the numerical
    modules under ``app.dynamics``, whose dominance checks log at DEBUG.
    Returns the log file path, or None when logging to the console only.
    """
    log_level = getattr(logging, os.getenv("LOG_LEVEL", "INFO").upper())
    dynamics_level = getattr(logging, os.getenv("DYNAMICS_LOG_LEVEL", logging.getLevelName(log_level)).upper())
    # Default to logs/rspcycles.log next to the package
    default_log_path = os.path.abspath(
        os.path.join(os.path.dirname(os.path.dirname(__file__)), "logs", "rspcycles.log")
    )
    log_file = os.getenv("LOG_FILE", default_log_path)

    handlers = [logging.StreamHandler()]

    try:
        log_dir = os.path.dirname(log_file)
        if log_dir and not os.path.exists(log_dir):
            os.makedirs(log_dir, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))
    except (PermissionError, OSError) as e:
        print(f"Warning: Could not create log file '{log_file}': {e}")
        print("Logging to console only")
        log_file = None

    # Handlers pass everything the most verbose logger emits
    handler_level = min(log_level, dynamics_level)
    for handler in handlers:
        handler.setLevel(handler_level)
        handler.setFormatter(
            logging.Formatter(
                "%(asctime)s %(levelname)s: %(message)s [in %(pathname)s:%(lineno)d]"
            )
        )

    # Clear existing handlers to avoid duplicate logs
    app.logger.handlers.clear()
    app.logger.propagate = False
    app.logger.setLevel(log_level)
    for handler in handlers:
        app.logger.addHandler(handler)

    # app.dynamics loggers propagate to app.logger; the root logger takes library output
    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)
    root_logger.handlers = []
    for handler in handlers:
        root_logger.addHandler(handler)
    logging.getLogger("app.dynamics").setLevel(dynamics_level)

    if not app.debug:
        logging.getLogger("werkzeug").setLevel(logging.ERROR)

    app.logger.debug(
        "Logging to %s (app %s, dynamics %s)",
        log_file or "console",
        logging.getLevelName(log_level),
        logging.getLevelName(dynamics_level),
    )
    return log_file
