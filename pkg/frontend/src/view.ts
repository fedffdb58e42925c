/** DOM builders for the result card and error states (no framework). */

import { CLASS_ORDER, DiagnosisResponse, referenceUrl } from './api.js'

export function formatPercent(p: number): string {
  return `${(p * 100).toFixed(1)}%`
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag)
  if (className) node.className = className
  if (text !== undefined) node.textContent = text
  return node
}

/**
 * The diagnosis card: predicted label, confidence, the manual-review
 * prompt exactly when the service flagged one (server copy, verbatim),
 * a collapsible per-class list in class-index order, the optional
 * relevance overlay, and a gallery link for the predicted class.
 */
export function renderResultCard(result: DiagnosisResponse, baseUrl: string): HTMLElement {
  const card = el('section', 'result-card')
  card.dataset.review = String(result.needs_manual_review)

  const header = el('div', 'result-header')
  header.appendChild(el('h2', 'result-label', result.label))
  const confidence = el('p', 'result-confidence', `Confidence: ${formatPercent(result.probability)}`)
  confidence.dataset.probability = String(result.probability)
  header.appendChild(confidence)
  card.appendChild(header)

  if (result.needs_manual_review && result.review_prompt) {
    const prompt = el('p', 'review-prompt', result.review_prompt)
    prompt.setAttribute('role', 'alert')
    card.appendChild(prompt)
  }

  if (result.heatmap_png_base64) {
    const figure = el('figure', 'heatmap')
    const img = el('img')
    img.src = `data:image/png;base64,${result.heatmap_png_base64}`
    img.alt = 'Relevance overlay: red regions drove the prediction'
    figure.appendChild(img)
    figure.appendChild(el('figcaption', undefined, 'Model attention (red = high relevance)'))
    card.appendChild(figure)
  }

  const details = el('details', 'per-class')
  details.appendChild(el('summary', undefined, 'All class probabilities'))
  const list = el('ol', 'per-class-list')
  for (const name of CLASS_ORDER) {
    const row = el('li', 'per-class-row')
    row.appendChild(el('span', 'class-name', name))
    row.appendChild(el('span', 'class-prob', formatPercent(result.per_class[name] ?? 0)))
    list.appendChild(row)
  }
  details.appendChild(list)
  card.appendChild(details)

  const gallery = el('a', 'gallery-link', `Typical ${result.label} images`)
  gallery.href = referenceUrl(baseUrl, result.label)
  gallery.target = '_blank'
  gallery.rel = 'noreferrer'
  card.appendChild(gallery)

  card.appendChild(el('p', 'model-version', `model ${result.model_version}`))
  return card
}

/** Error panel; wires a Retry button when the failure is retryable. */
export function renderError(message: string, onRetry?: () => void): HTMLElement {
  const panel = el('section', 'error-panel')
  panel.setAttribute('role', 'alert')
  panel.appendChild(el('p', 'error-message', message))
  if (onRetry) {
    const button = el('button', 'retry-button', 'Retry')
    button.type = 'button'
    button.addEventListener('click', onRetry)
    panel.appendChild(button)
  }
  return panel
}

export function renderSpinner(): HTMLElement {
  const panel = el('section', 'pending-panel')
  panel.appendChild(el('p', undefined, 'Analyzing image...'))
  return panel
}
