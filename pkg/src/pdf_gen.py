from reportlab.lib import colors
from reportlab.lib.pagesizes import A4, letter
from reportlab.platypus import SimpleDocTemplate, Paragraph, Spacer, Table, TableStyle
from reportlab.lib.styles import getSampleStyleSheet, ParagraphStyle
from reportlab.lib.units import inch
from datetime import datetime
import io

PAGE_SIZES = {"Letter": letter, "A4": A4}


def _level_table(frame, header_color):
    data = [[''] + [str(c) for c in frame.columns]]
    for label, row in frame.iterrows():
        data.append([label] + [str(v) for v in row.tolist()])
    width = 6.5 * inch / len(data[0])
    t = Table(data, colWidths=[1.2 * inch] + [width] * (len(data[0]) - 1))
    t.setStyle(TableStyle([
        ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor(header_color)),
        ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
        ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
        ('FONTSIZE', (0, 0), (-1, -1), 8),
        ('ALIGN', (1, 0), (-1, -1), 'RIGHT'),
        ('BACKGROUND', (0, 1), (-1, -1), colors.HexColor('#F8F9FA')),
        ('GRID', (0, 0), (-1, -1), 0.5, colors.grey),
    ]))
    return t


def generate_pdf_report(report, corpus_name, reference=None, checks=None, unsolved=None,
                        page_size="Letter"):
    """Rating distribution report; returns a BytesIO positioned at 0."""
    buffer = io.BytesIO()
    doc = SimpleDocTemplate(buffer, pagesize=PAGE_SIZES.get(page_size, letter))
    styles = getSampleStyleSheet()

    title_style = ParagraphStyle(
        'Title',
        parent=styles['Heading1'],
        fontSize=22,
        textColor=colors.HexColor('#0033A0'),
        spaceAfter=24
    )

    heading_style = ParagraphStyle(
        'Heading',
        parent=styles['Heading2'],
        fontSize=14,
        textColor=colors.HexColor('#0033A0'),
        spaceBefore=18,
        spaceAfter=10
    )

    elements = []

    # --- Title ---
    elements.append(Paragraph("Puzzle Rating Report", title_style))
    elements.append(Paragraph(f"Corpus: {corpus_name}", styles['Normal']))
    elements.append(Paragraph(f"Ladder: {report.ladder}, levels BRT to {report.labels[-1]}", styles['Normal']))
    elements.append(Paragraph(f"Generated: {datetime.now().strftime('%Y-%m-%d')}", styles['Normal']))
    elements.append(Spacer(1, 0.3 * inch))

    solved = report.cumulative[-1] if report.newly else 0
    elements.append(Paragraph(f"Solved: {solved} / {report.total} puzzles", heading_style))

    # --- Distribution ---
    elements.append(Paragraph("Distribution", heading_style))
    elements.append(_level_table(report.to_frame(), '#0033A0'))

    if reference is not None:
        elements.append(Paragraph("Reference distribution", heading_style))
        elements.append(_level_table(reference.to_frame(), '#E31837'))

    # --- Shape checks ---
    if checks:
        elements.append(Paragraph("Shape checks", heading_style))
        check_data = [['Check', 'Value']]
        for key, value in checks.items():
            check_data.append([key, f"{value:.3f}" if isinstance(value, float) else str(value)])
        t_checks = Table(check_data, colWidths=[3 * inch, 2 * inch])
        t_checks.setStyle(TableStyle([
            ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor('#708090')),
            ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
            ('GRID', (0, 0), (-1, -1), 0.5, colors.grey)
        ]))
        elements.append(t_checks)

    if unsolved:
        elements.append(Paragraph("Unsolved puzzles", heading_style))
        for line in unsolved[:20]:
            elements.append(Paragraph(f"<font face='Courier' size='7'>{line}</font>", styles['Normal']))

    doc.build(elements)
    buffer.seek(0)
    return buffer
