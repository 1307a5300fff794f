from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from .hypersphere import EvalReport
from .volume import OverlapReport


class ReportDisplay:
    """Human-readable summaries for the nesphere CLI, written to stderr"""

    def __init__(self, console: Console):
        self.console = console

    def show_eval(self, reports: dict[str, EvalReport], title: str = "Evaluation"):
        table = Table(title=title)
        for column in ("Type", "TP", "FP", "FN", "Precision", "Recall", "F1"):
            table.add_column(column, justify="left" if column == "Type" else "right")
        for label, report in reports.items():
            table.add_row(
                label,
                str(report.true_positive),
                str(report.false_positive),
                str(report.false_negative),
                f"{report.precision:.4f}",
                f"{report.recall:.4f}",
                f"{report.f1:.4f}",
            )
        self.console.print(table)

    def show_overlap(self, report: OverlapReport):
        body = (
            f"precision {report.precision:.4f}  recall {report.recall:.4f}  "
            f"F1 {report.f1:.4f} ± {report.std_error.get('f1', 0.0):.4f}"
        )
        if report.degenerate:
            body += "\n[yellow]a sphere received no samples[/yellow]"
        self.console.print(Panel(body, title="Volume overlap", border_style="blue"))

    def show_candidates(self, candidates: list[tuple[str, float, bool]], precision: dict[int, float]):
        table = Table(title="Candidates")
        table.add_column("Rank", justify="right")
        table.add_column("Token", justify="left")
        table.add_column("Distance", justify="right")
        table.add_column("Inside", justify="center")
        for rank, (token, distance, inside) in enumerate(candidates[:25], start=1):
            table.add_row(str(rank), token, f"{distance:.4f}", "✓" if inside else "")
        self.console.print(table)
        if precision:
            self.print_dim("  ".join(f"P@{k}={p:.3f}" for k, p in precision.items()))

    def show_scan(self, best: dict[str, tuple[int, float]]):
        table = Table(title="Best dimension per type")
        table.add_column("Type", justify="left")
        table.add_column("Dim", justify="right")
        table.add_column("F1", justify="right")
        for label, (dim, f1) in best.items():
            table.add_row(label, str(dim), f"{f1:.4f}")
        self.console.print(table)

    def print_dim(self, message: str):
        """Print a dimmed message"""
        self.console.print(f"[dim]{message}[/dim]")

    def print_error(self, message: str):
        """Print an error message"""
        self.console.print(f"[red]Error:[/red] {message}")
