"""Day-ahead electricity price forecasting engine.

Thin python surface over the C++ core: variance-stabilising transform,
seasonal means, the estimators (OLS, Yule-Walker, lasso paths), the 58-model
registry, rolling-window backtesting and forecast evaluation.
"""

from epf._core import (  # noqa: F401
    MAD_FACTOR,
    ArFit,
    BacktestRun,
    DataError,
    DmResult,
    ForecastMatrix,
    HourlyDm,
    LassoFit,
    NumericError,
    OccurrenceTable,
    PriceSeries,
    SeasonalMeans,
    TransformSpec,
    VarFit,
    attach_realized,
    backtest,
    combine,
    dm_hourly,
    dm_multivariate,
    dm_test,
    fit_means,
    fit_transform,
    ingest_csv,
    lambda_max,
    lasso_path,
    load_csv,
    mae,
    model_ids,
    mpdfb,
    mv_yule_walker,
    occurrence,
    ols,
    rmse,
    write_series_csv,
    yule_walker,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
