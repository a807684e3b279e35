"""Environment-driven defaults shared by the library, CLI and HTTP service."""

import os

from dotenv import load_dotenv

load_dotenv()

MU_GRID_SIZE = int(os.getenv("RELAY_MU_GRID_SIZE", "201"))
MAX_GRID_TUPLES = int(os.getenv("RELAY_MAX_GRID_TUPLES", "10000000"))
WORKERS = int(os.getenv("RELAY_WORKERS", "1"))
LOG_LEVEL = os.getenv("RELAY_LOG_LEVEL", "WARNING")
API_KEY = os.getenv("RELAY_API_KEY", "changeme")  # set in env for real usage
