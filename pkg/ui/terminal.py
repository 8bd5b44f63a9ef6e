"""Coloured progress reporting for the command line."""

import threading
import time
from typing import Dict, List, Optional

from blessed import Terminal


class Console:
    """Run log with coloured terminal echo and a progress spinner."""

    COLORS = {
        'system': 'cyan',
        'success': 'green',
        'error': 'red',
        'warning': 'yellow',
    }

    def __init__(self, quiet: bool = False, verbose: bool = False, term: Optional[Terminal] = None):
        self.term = term or Terminal()
        self.quiet = quiet
        self.verbose = verbose
        self.logs: List[Dict[str, str]] = []
        self.loading = False
        self.loading_message = ""
        self.spinner_thread: Optional[threading.Thread] = None

    def add_log(self, log_type: str, text: str, detail_level: str = 'normal') -> None:
        """
        Add a log entry and echo it.

        Args:
            log_type: system, success, error or warning
            text: message
            detail_level: 'normal' or 'verbose' (only echoed with verbose=True)
        """
        self.logs.append({
            'type': log_type,
            'text': text,
            'detail_level': detail_level,
        })
        if self.quiet or (detail_level == 'verbose' and not self.verbose):
            return
        color = getattr(self.term, self.COLORS.get(log_type, 'normal'))
        prefix = self.term.clear_eol if self.loading else ''
        print(prefix + color(text), flush=True)

    def entries(self) -> List[Dict[str, str]]:
        return list(self.logs)

    def _spinner_worker(self) -> None:
        frames = ['⠋', '⠙', '⠹', '⠸', '⠼', '⠴', '⠦', '⠧', '⠇', '⠏']
        frame_idx = 0
        print(self.term.hide_cursor, end='', flush=True)
        while self.loading:
            spinner = frames[frame_idx % len(frames)]
            print('\r' + self.term.clear_eol + self.term.cyan(f"{spinner} {self.loading_message}"), end='', flush=True)
            frame_idx += 1
            time.sleep(0.1)
        print('\r' + self.term.clear_eol + self.term.normal_cursor, end='', flush=True)

    def start_loading(self, message: str) -> None:
        """Show an animated spinner until stop_loading()."""
        self.loading_message = message
        if self.quiet or not self.term.is_a_tty:
            return
        self.loading = True
        self.spinner_thread = threading.Thread(target=self._spinner_worker, daemon=True)
        self.spinner_thread.start()

    def stop_loading(self) -> None:
        self.loading = False
        self.loading_message = ""
        if self.spinner_thread and self.spinner_thread.is_alive():
            self.spinner_thread.join(timeout=0.5)
        self.spinner_thread = None

    def banner(self, title: str) -> None:
        if self.quiet:
            return
        width = min(self.term.width or 80, 80)
        print(self.term.bold + self.term.green("=" * width))
        print(self.term.green(title.center(width)))
        print(self.term.green("=" * width) + self.term.normal)
