"""Generate interactive dashboards from attention analysis and training runs.

A dashboard combines the pairwise cosine similarity of a forward pass's attention maps, the
training loss curve when one is available, and the per-metric means of an evaluation report.
Plotly renders a self-contained HTML page; a Vega-Lite specification is emitted alongside for
tools that prefer declarative charts.
"""

import json

import pandas as pd
import plotly.graph_objects as go
from plotly.subplots import make_subplots

from .report import MetricReport


class ExperimentDashboardGenerator:
    """Build dashboards for one trained model and one traced sample"""

    def generate_plotly_dashboard(
        self,
        similarity: pd.DataFrame,
        loss_curve: pd.DataFrame | None = None,
        report: MetricReport | None = None,
        title: str = "LFormer Experiment Dashboard",
    ) -> str:
        """Generate an interactive HTML dashboard using Plotly.

        Args:
            similarity: Square block-by-block cosine similarity of attention maps.
            loss_curve: Frame with `step` and `loss` columns, if the model was trained here.
            report: Evaluation report whose means are shown as bars.
            title: Page title.

        Returns:
            Complete HTML string with embedded Plotly dashboard.
        """
        fig = make_subplots(
            rows=2,
            cols=2,
            subplot_titles=("Attention Map Similarity", "Training Loss", "Metric Means", "Similarity to First Map"),
            specs=[[{"type": "heatmap"}, {"type": "scatter"}], [{"type": "bar"}, {"type": "scatter"}]],
        )

        labels = [str(c) for c in similarity.columns]
        fig.add_trace(
            go.Heatmap(z=similarity.to_numpy(), x=labels, y=labels, zmin=-1, zmax=1, colorscale="Viridis"),
            row=1,
            col=1,
        )

        if loss_curve is not None and not loss_curve.empty:
            fig.add_trace(
                go.Scatter(x=loss_curve["step"], y=loss_curve["loss"], mode="lines", name="Loss"), row=1, col=2
            )

        if report is not None and report.images:
            means = report.mean()
            fig.add_trace(
                go.Bar(x=list(means), y=list(means.values()), marker_color=self._get_colors(len(means)), name="Means"),
                row=2,
                col=1,
            )

        fig.add_trace(
            go.Scatter(x=labels, y=similarity.iloc[0].to_numpy(), mode="lines+markers", name="vs A1"), row=2, col=2
        )

        fig.update_layout(height=800, title_text=title, showlegend=False)
        return fig.to_html(include_plotlyjs=True)

    def generate_vega_dashboard(self, similarity: pd.DataFrame, loss_curve: pd.DataFrame | None = None) -> str:
        """Generate a Vega-Lite specification with the similarity heatmap and the loss curve.

        Returns:
            JSON string containing the Vega-Lite specification.
        """
        cells = [
            {"row": str(r), "col": str(c), "similarity": float(similarity.loc[r, c])}
            for r in similarity.index
            for c in similarity.columns
        ]
        panels: list[dict] = [
            {
                "title": "Attention Map Similarity",
                "data": {"values": cells},
                "mark": "rect",
                "encoding": {
                    "x": {"field": "col", "type": "ordinal"},
                    "y": {"field": "row", "type": "ordinal"},
                    "color": {"field": "similarity", "type": "quantitative", "scale": {"domain": [-1, 1]}},
                    "tooltip": ["row", "col", "similarity"],
                },
            }
        ]
        if loss_curve is not None and not loss_curve.empty:
            panels.append(
                {
                    "title": "Training Loss",
                    "data": {"values": loss_curve[["step", "loss"]].to_dict(orient="records")},
                    "mark": "line",
                    "encoding": {
                        "x": {"field": "step", "type": "quantitative"},
                        "y": {"field": "loss", "type": "quantitative"},
                    },
                }
            )

        vega_spec = {
            "$schema": "https://vega.github.io/schema/vega-lite/v5.json",
            "title": "LFormer Experiment Dashboard",
            "hconcat": panels,
        }
        return json.dumps(vega_spec, indent=2)

    def _get_colors(self, count: int) -> list[str]:
        palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"]
        return [palette[i % len(palette)] for i in range(count)]
