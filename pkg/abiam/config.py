import os

from dotenv import load_dotenv

load_dotenv()

LOG_FILE = os.getenv("ABIAM_LOG_FILE", "abiam.log")
LOG_LEVEL = os.getenv("ABIAM_LOG_LEVEL", "INFO")
DATABASE_URL = os.getenv("ABIAM_DATABASE_URL", "")
OUTPUT_DIR = os.getenv("ABIAM_OUTPUT_DIR", "results")
WORKERS = int(os.getenv("ABIAM_WORKERS", "1"))
