"""Configuration management"""
from functools import lru_cache

from pydantic_settings import BaseSettings

from app.models.schemas import QuadratureSpec, ToleranceProfile


class Settings(BaseSettings):
    """Toolkit settings, overridable through GMMS_* environment variables or .env"""
    # Application
    app_name: str = "GMMS Purification Toolkit"
    app_version: str = "1.0.0"
    environment: str = "main"
    log_level: str = "INFO"

    # Tolerance profile
    tau_trace: float = 1e-10
    tau_psd: float = 1e-10
    tau_grid: float = 1e-3
    quadrature_tol: float = 1e-8
    diagonal_tol: float = 1e-12
    max_doublings: int = 3

    # Disk quadrature for operator-valued integrands
    radial_order: int = 64
    angular_order: int = 128

    # Wigner smoothing quadrature
    smoothing_radial_order: int = 96
    smoothing_angular_order: int = 128
    smoothing_margin: float = 6.0

    # Husimi grids
    husimi_extent: float = 4.0
    husimi_resolution: int = 81

    class Config:
        env_file = ".env"
        env_prefix = "GMMS_"
        case_sensitive = False

    def tolerance_profile(self) -> ToleranceProfile:
        return ToleranceProfile(
            tau_trace=self.tau_trace,
            tau_psd=self.tau_psd,
            tau_grid=self.tau_grid,
            quadrature_tol=self.quadrature_tol,
            diagonal_tol=self.diagonal_tol,
            max_doublings=self.max_doublings,
        )

    def quadrature(self) -> QuadratureSpec:
        return QuadratureSpec(radial_order=self.radial_order, angular_order=self.angular_order)

    def smoothing_quadrature(self) -> QuadratureSpec:
        return QuadratureSpec(
            radial_order=self.smoothing_radial_order,
            angular_order=self.smoothing_angular_order,
        )


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()
