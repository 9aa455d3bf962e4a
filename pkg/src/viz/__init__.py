from .figures import bins_figure, correlation_figure, regression_figure, stability_figure, street_map_figure

__all__ = ["bins_figure", "correlation_figure", "regression_figure", "stability_figure", "street_map_figure"]
