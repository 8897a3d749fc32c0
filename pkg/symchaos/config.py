from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
DATA_DIR = ROOT / "data"
FIXTURES_DIR = DATA_DIR / "fixtures"
REFERENCE_MODEL_PATH = DATA_DIR / "reference_model.json"


def load_config():
    """Default numeric settings per pipeline step. CLI flags override these."""
    config = {
        "data_dir": DATA_DIR,
        "fixtures_dir": FIXTURES_DIR,
        "reference_model": REFERENCE_MODEL_PATH,
        "embedding": {
            "max_dim": 8,
            "fnn_tol": 0.01,
            "fnn_ratio": 10.0,
            "max_lag_dim": 16,
        },
        "lyapunov": {
            "min_points": 500,
            "horizon": 30,
            "min_lambda": 0.01,
            "delta0": 1e-6,
            "delta_tol": 1e-2,
        },
        "marking": {
            "coord": 0,
            "min_len": 8,
            "prominence": 0.01,
        },
        "descriptors": {
            "M": 64,
            "q": 8,
        },
        "ga": {
            "population": 64,
            "generations": 100,
            "crossover_rate": 0.8,
            "mutation_rate": 0.1,
            "elite": 2,
            "tournament_k": 3,
            "exhaustive_limit": 64,
            "top_k": 5,
        },
        "sweep": {
            "n_transient": 1000,
            "smooth_tol": 0.5,
        },
        "generate": {
            "divergence_limit": 1e12,
            "max_period": 100,
            "period_tol": 1e-3,
        },
    }
    return config
