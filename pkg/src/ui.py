"""
Terminal output components using Rich library
"""

from typing import Iterable, Optional

from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text
from rich.box import ROUNDED, DOUBLE

from config import APP_NAME, APP_VERSION

console = Console()

_quiet = False


def set_quiet(quiet: bool = True):
    global _quiet
    _quiet = quiet


def print_banner():
    if _quiet:
        return
    console.print(Text(f"{APP_NAME} v{APP_VERSION}", style="cyan bold"))


def print_success(message: str):
    if not _quiet:
        console.print(f"[green]✓[/green] {message}")


def print_error(message: str):
    console.print(f"[red]✗[/red] [red]{message}[/red]")


def print_warning(message: str):
    console.print(f"[yellow]⚠[/yellow] [yellow]{message}[/yellow]")


def print_info(message: str):
    if not _quiet:
        console.print(f"[cyan]→[/cyan] {message}")


def print_section_header(title: str):
    if _quiet:
        return
    console.print()
    console.print(Panel(title, style="cyan", box=ROUNDED))
    console.print()


def print_plain(line: str):
    """Machine-readable line: no markup, no highlighting."""
    console.print(line, markup=False, highlight=False)


def print_config(settings: dict, title: str = "CONFIGURATION"):
    if _quiet:
        return
    table = Table(box=ROUNDED, show_header=False, border_style="cyan")
    table.add_column("Key", style="dim")
    table.add_column("Value", style="bold")

    for key, value in settings.items():
        if value is None:
            value = "-"
        table.add_row(key, str(value))

    console.print(Panel(table, title=f"[bold cyan]{title}[/bold cyan]", border_style="cyan", box=ROUNDED))


def print_cycle_line(cycle: int, residual: float, rate: Optional[float]):
    rate_text = "-" if rate is None else f"{rate:.6e}"
    print_plain(f"cycle {cycle} residual {residual:.9e} rate {rate_text}")


def print_solve_summary(report):
    table = Table(box=DOUBLE, show_header=False, border_style="green" if report.converged else "yellow")
    table.add_column("Field", style="dim")
    table.add_column("Value", style="bold")

    table.add_row("Converged", "yes" if report.converged else "no")
    table.add_row("Cycles", str(report.iterations))
    table.add_row("Final relative residual", f"{report.final_relative_residual:.3e}")
    table.add_row("Mean convergence factor", f"{report.mean_rate:.4f}")
    table.add_row("Wall time", f"{report.wall_time * 1000.0:.1f} ms")

    console.print(Panel(table, title="[bold]SOLVE REPORT[/bold]", box=DOUBLE))


def print_study_table(axis: str, rows: Iterable):
    table = Table(title=f"Study: {axis}", box=ROUNDED, border_style="cyan")
    table.add_column(axis, style="cyan")
    table.add_column("Cycles", justify="right")
    table.add_column("Final rel. residual", justify="right", style="green")
    table.add_column("Mean rate", justify="right", style="yellow")
    table.add_column("Converged", justify="center")

    for row in rows:
        table.add_row(
            str(row.sweep_value),
            str(row.cycles),
            f"{row.final_rel_residual:.3e}",
            f"{row.mean_rate:.4f}",
            "[green]yes[/green]" if row.converged else "[red]no[/red]",
        )

    console.print(table)


def print_probe_result(kind: str, omega_damp: float, estimate: float):
    style = "green" if estimate < 1.0 else "red"
    console.print(Panel(
        f"Smoother: [bold]{kind}[/bold]\n"
        f"Outer omega: {omega_damp}\n"
        f"Contraction estimate ||I - wC^-1 A||: [{style}]{estimate:.6e}[/{style}]",
        title="[bold cyan]CONTRACTION PROBE[/bold cyan]",
        border_style="cyan",
        box=ROUNDED,
    ))
