import mpmath


def pytest_report_header(config):
    backend = mpmath.libmp.BACKEND
    return f"mpmath {mpmath.__version__} (backend: {backend})"
