from .env import RuntimeEnv, detect_env, threads_from_env

__all__ = ["RuntimeEnv", "detect_env", "threads_from_env"]
