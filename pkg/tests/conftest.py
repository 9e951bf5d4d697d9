import os

from hypothesis import settings

settings.register_profile("lab", max_examples=30, deadline=None)
settings.load_profile("lab")
os.environ.pop("SFUC_LAB_WORKERS", None)
