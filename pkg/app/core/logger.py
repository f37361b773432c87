import logging
import sys
from pathlib import Path
from logging.handlers import RotatingFileHandler
import json
from datetime import datetime

from app.core.config import get_settings

class ComputationFormatter(logging.Formatter):
    """Formatter that focuses on searches, certificates and truncations"""

    def format(self, record):
        # Skip debug messages
        if record.levelno < logging.INFO:
            return ""

        message = record.getMessage()

        if "Certificate issued" in message:
            return f"✅ CERTIFICATE: {message.split('Certificate issued:')[-1].strip()}"
        elif "Relation found" in message:
            return f"🔁 RELATION: {message.split('Relation found:')[-1].strip()}"
        elif "Searching" in message:
            return f"🔍 {message}"
        elif "Truncated" in message:
            return f"⚠️  {message}"
        elif "Purified" in message:
            return f"🧮 {message}"
        elif record.levelno >= logging.ERROR or "error" in message.lower():
            return f"❗ ERROR: {message}"
        elif record.levelno == logging.WARNING:
            return f"⚠️  {message}"
        else:
            return message

class JsonFormatter(logging.Formatter):
    """Formatter that outputs logs in JSON format for file logging"""

    def format(self, record):
        log_obj = {
            "timestamp": datetime.fromtimestamp(record.created).isoformat(),
            "level": record.levelname,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
        }

        if hasattr(record, "operation"):
            log_obj["operation"] = record.operation

        if record.exc_info:
            log_obj["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_obj)

def setup_logger(name: str = "mcg") -> logging.Logger:
    """Set up and configure logger"""
    settings = get_settings()
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO))

    # Prevent duplicate handlers
    if logger.handlers:
        return logger

    # stdout is reserved for reports
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(ComputationFormatter())
    logger.addHandler(console_handler)

    if settings.LOG_TO_FILE:
        logs_dir = Path(settings.LOG_DIR)
        logs_dir.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            logs_dir / "mcg.log",
            maxBytes=10*1024*1024,  # 10MB
            backupCount=5
        )
        file_handler.setFormatter(JsonFormatter())
        logger.addHandler(file_handler)

    return logger

# Create default logger instance
logger = setup_logger()
