import os
from dataclasses import dataclass, replace
from typing import Tuple

from dotenv import load_dotenv

load_dotenv()

SUPPORTED_PRECISION_BITS = (53, 128, 256, 512)


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances shared by the OPA solvers"""
    tol: float = 1e-11
    max_iter: int = 10000
    bracket: Tuple[float, float] = (-2.5, 2.5)
    orth_tol: float = 1e-9

    def with_overrides(self, **kwargs):
        return replace(self, **kwargs)


@dataclass(frozen=True)
class ExtremalConfig:
    """Lagrange-system solver settings"""
    newton_tol: float = 1e-11
    max_newton: int = 200
    grid_size: int = 100
    double_max_degree: int = 12
    extended_bits: int = 256
    jacobian_floor: float = 1e-14
    direct_restarts: int = 4
    oracle_slack: float = 1e-4

    def with_overrides(self, **kwargs):
        return replace(self, **kwargs)


@dataclass(frozen=True)
class OrbitConfig:
    """Orbit iteration and branch search settings"""
    budget: int = 40
    exit_tol: float = 1e-6
    converge_tol: float = 1e-12
    converge_steps: int = 3
    max_nodes: int = 5000

    def with_overrides(self, **kwargs):
        return replace(self, **kwargs)


class Config:
    """Base configuration class"""

    PRECISION_BITS = int(os.environ.get('OPA_LAB_PRECISION_BITS', 53))
    EXTENDED_BITS = int(os.environ.get('OPA_LAB_EXTENDED_BITS', 256))
    TOL = float(os.environ.get('OPA_LAB_TOL', 1e-11))
    MAX_ITER = int(os.environ.get('OPA_LAB_MAX_ITER', 10000))
    SEARCH_CAP = int(os.environ.get('OPA_LAB_SEARCH_CAP', 5000))
    ORBIT_BUDGET = int(os.environ.get('OPA_LAB_ORBIT_BUDGET', 40))

    OUTPUT_DIR = os.environ.get('OPA_LAB_OUTPUT_DIR') or 'results'
    LOG_DIR = os.environ.get('OPA_LAB_LOG_DIR') or 'logs'

    # Grids reproduced by `tables`
    EXCLUSION_PS = (1.5, 5.0 / 3.0, 1.75, 1.8, 11.0 / 6.0, 2.1,
                    4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0)
    EXTREMAL_PS = (4.0, 6.0, 8.0, 10.0)
    EXTREMAL_DS = (2, 3, 4)
    TAU_PS = (4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0)

    @classmethod
    def solver_config(cls):
        return SolverConfig(tol=cls.TOL, max_iter=cls.MAX_ITER)

    @classmethod
    def extremal_config(cls):
        return ExtremalConfig(extended_bits=cls.EXTENDED_BITS)

    @classmethod
    def orbit_config(cls):
        return OrbitConfig(budget=cls.ORBIT_BUDGET, max_nodes=cls.SEARCH_CAP)

    @staticmethod
    def init_logging():
        """Initialize logging for the selected configuration"""
        pass


class DevelopmentConfig(Config):
    """Development configuration"""
    DEBUG = True

    @staticmethod
    def init_logging():
        Config.init_logging()

        # Log to console in development
        import logging
        from logging import StreamHandler

        root = logging.getLogger()
        if not any(isinstance(h, StreamHandler) for h in root.handlers):
            stream_handler = StreamHandler()
            stream_handler.setLevel(logging.INFO)
            stream_handler.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
            root.addHandler(stream_handler)
        root.setLevel(logging.INFO)


class ProductionConfig(Config):
    """Production configuration (long sweeps on a server)"""
    DEBUG = False

    @staticmethod
    def init_logging():
        Config.init_logging()

        # Log to file in production
        import logging
        from logging.handlers import RotatingFileHandler

        os.makedirs(Config.LOG_DIR, exist_ok=True)

        file_handler = RotatingFileHandler(
            os.path.join(Config.LOG_DIR, 'opa_lab.log'),
            maxBytes=10240000,  # 10MB
            backupCount=10
        )
        file_handler.setFormatter(logging.Formatter(
            '%(asctime)s %(levelname)s: %(message)s [in %(pathname)s:%(lineno)d]'
        ))
        file_handler.setLevel(logging.INFO)

        root = logging.getLogger()
        root.addHandler(file_handler)
        root.setLevel(logging.INFO)
        root.info('OPA Lab startup')


class TestingConfig(Config):
    """Testing configuration"""
    TESTING = True
    SEARCH_CAP = 500


# Configuration dictionary
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config(name=None):
    """Configuration class selected by name or OPA_LAB_ENV"""
    name = name or os.environ.get('OPA_LAB_ENV', 'default')
    return config.get(name, config['default'])
