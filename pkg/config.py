import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


def _float(name, default):
    return float(os.getenv(name, default))


def _int(name, default):
    return int(os.getenv(name, default))


class Config:
    # Logging
    LOG_LEVEL = os.getenv('ORLICZ_LOG_LEVEL', 'WARNING')
    LOG_FILE = os.getenv('ORLICZ_LOG_FILE') or None

    # Solvers
    LUXEMBURG_RTOL = _float('ORLICZ_LUXEMBURG_RTOL', '1e-12')
    K_RTOL = _float('ORLICZ_K_RTOL', '1e-10')
    MAX_ITER = _int('ORLICZ_MAX_ITER', '400')

    # Geometry
    GEOMETRY_TOL = _float('ORLICZ_GEOMETRY_TOL', '1e-9')

    # Level functions
    LEVEL_N_SUB = _int('ORLICZ_LEVEL_N_SUB', '64')
    LEVEL_CONVERGENCE_TOL = _float('ORLICZ_LEVEL_CONVERGENCE_TOL', '1e-8')

    # Oracles
    ORACLE_SEED = _int('ORLICZ_ORACLE_SEED', '0')
    ORACLE_TRIALS = _int('ORLICZ_ORACLE_TRIALS', '10000')
    ORACLE_GRID_POINTS = _int('ORLICZ_ORACLE_GRID_POINTS', '2000')
    ORACLE_TOL = _float('ORLICZ_ORACLE_TOL', '1e-6')

    POSITIVE = (
        'LUXEMBURG_RTOL', 'K_RTOL', 'MAX_ITER', 'GEOMETRY_TOL', 'LEVEL_N_SUB',
        'LEVEL_CONVERGENCE_TOL', 'ORACLE_TRIALS', 'ORACLE_GRID_POINTS', 'ORACLE_TOL',
    )

    @classmethod
    def validate(cls):
        from orlicz_lorentz.utils.errors import ConfigurationError

        bad = {name: getattr(cls, name) for name in cls.POSITIVE if not getattr(cls, name) > 0}
        if cls.ORACLE_SEED < 0:
            bad['ORACLE_SEED'] = cls.ORACLE_SEED
        if bad:
            raise ConfigurationError('Configuration values out of range', details=bad)


class DevelopmentConfig(Config):
    LOG_LEVEL = os.getenv('ORLICZ_LOG_LEVEL', 'INFO')


class TestingConfig(Config):
    TESTING = True
    LOG_LEVEL = 'WARNING'
    LOG_FILE = None
    ORACLE_TRIALS = 500
    ORACLE_GRID_POINTS = 400


class ProductionConfig(Config):
    LOG_LEVEL = os.getenv('ORLICZ_LOG_LEVEL', 'WARNING')


# Default configuration
config = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'production': ProductionConfig,
    'default': DevelopmentConfig
}
